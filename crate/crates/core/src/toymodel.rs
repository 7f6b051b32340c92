//! Two overlapping line shapes, `A(ω) = A₀(ω − Δ₀) + λ A₀(ω − Δ₀ − δ)`, used
//! to measure how far a neighbouring peak drags the apparent center of the
//! peak at `Δ₀`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::io::{fmt_f64, Table};
use crate::spectral::{self, Spectrum};
use crate::trotter::{Filter, FilterFamily};

/// Separation `δ/Δ₀` of the reference configuration.
pub const DEFAULT_SEPARATION_RATIO: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPeakModel {
    pub center: f64,
    pub separation: f64,
    pub relative_height: f64,
    pub filter: Filter,
}

impl TwoPeakModel {
    pub fn new(center: f64, separation: f64, relative_height: f64, filter: Filter) -> Result<Self> {
        if !(center.is_finite() && center > 0.0) {
            return Err(param("peak center must be positive"));
        }
        if !(separation.is_finite() && separation > 0.0) {
            return Err(param("peak separation must be positive"));
        }
        if !(relative_height.is_finite() && relative_height >= 0.0) {
            return Err(param("relative height must be non-negative"));
        }
        if filter.family == FilterFamily::None || !(filter.eta > 0.0) {
            return Err(param("the toy model needs a broadened line shape"));
        }
        Ok(Self {
            center,
            separation,
            relative_height,
            filter,
        })
    }

    fn line(&self, x: f64) -> f64 {
        spectral::filter_fourier(&self.filter, x).expect("validated filter")
    }

    /// `dA₀/dω` at offset `x`.
    fn line_slope(&self, x: f64) -> f64 {
        let eta = self.filter.eta;
        match self.filter.family {
            FilterFamily::Lorentzian => {
                let d = x * x + eta * eta;
                -2.0 * eta * x / (std::f64::consts::PI * d * d)
            }
            FilterFamily::Gaussian => {
                let s = self.filter.sigma();
                -x / (s * s) * self.line(x)
            }
            FilterFamily::None => unreachable!(),
        }
    }

    pub fn value(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        self.line(x) + self.relative_height * self.line(x - self.separation)
    }

    pub fn slope(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        self.line_slope(x) + self.relative_height * self.line_slope(x - self.separation)
    }
}

/// The model on `omegas`, scaled so that its largest sample is 1.
pub fn two_peak_spectrum(model: &TwoPeakModel, omegas: &[f64]) -> Spectrum {
    let raw: Vec<f64> = omegas.iter().map(|&w| model.value(w)).collect();
    let top = raw.iter().cloned().fold(f64::MIN, f64::max);
    let scale = if top > 0.0 { 1.0 / top } else { 1.0 };
    Spectrum {
        d_omega: if omegas.len() > 1 { omegas[1] - omegas[0] } else { 0.0 },
        omegas: omegas.to_vec(),
        values: raw.into_iter().map(|v| v * scale).collect(),
        filter: model.filter,
        imaginary_residue: 0.0,
        provenance: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakShift {
    /// Relative shift `|Δ₀′ − Δ₀| / Δ₀`.
    pub shift: f64,
    /// Position `Δ₀′` of the tracked maximum.
    pub position: f64,
    /// The first peak has merged into the second: the tracked maximum sits
    /// closer to `Δ₀ + δ` than to `Δ₀`.
    pub absorbed: bool,
}

const SCAN_POINTS: usize = 20_000;

/// Locates the maximum nearest `Δ₀` as a root of the analytic slope.
///
/// All critical points lie in `[Δ₀, Δ₀ + δ]`, where both line shapes pull in
/// opposite directions. The interval is scanned for `+ → −` slope changes
/// and the bracket nearest `Δ₀` is bisected to machine precision.
pub fn peak_shift(model: &TwoPeakModel) -> PeakShift {
    let (c, d) = (model.center, model.separation);
    let lo = c - 1e-3 * d;
    let step = d * (1.0 + 2e-3) / SCAN_POINTS as f64;
    let mut prev = (lo, model.slope(lo));
    let mut bracket = None;
    for k in 1..=SCAN_POINTS {
        let w = lo + k as f64 * step;
        let s = model.slope(w);
        if prev.1 >= 0.0 && s < 0.0 {
            bracket = Some((prev.0, w));
            break;
        }
        prev = (w, s);
    }
    // Both line shapes are unimodal, so a maximum always exists in range.
    let (mut a, mut b) = bracket.expect("two-peak model has a maximum between its centers");
    while b - a > f64::EPSILON * b.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if model.slope(m) >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let position = 0.5 * (a + b);
    PeakShift {
        shift: (position - c).abs() / c,
        position,
        absorbed: position >= c + d / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub eta: f64,
    pub lambda: f64,
    pub family: FilterFamily,
    pub shift: f64,
    pub absorbed: bool,
}

/// Peak shifts on an `(η, λ)` grid for one family, with `Δ₀ = 1`.
pub fn shift_table(
    family: FilterFamily,
    separation_ratio: f64,
    etas: &[f64],
    lambdas: &[f64],
) -> Result<Vec<ShiftPoint>> {
    let mut out = Vec::with_capacity(etas.len() * lambdas.len());
    for &lambda in lambdas {
        for &eta in etas {
            let m = TwoPeakModel::new(1.0, separation_ratio, lambda, Filter::new(family, eta)?)?;
            let s = peak_shift(&m);
            out.push(ShiftPoint {
                eta,
                lambda,
                family,
                shift: s.shift,
                absorbed: s.absorbed,
            });
        }
    }
    Ok(out)
}

pub fn shift_points_table(points: &[ShiftPoint]) -> Table {
    let mut t = Table::new(["eta", "lambda", "family", "shift", "absorbed"]);
    for p in points {
        t.push_row(vec![
            fmt_f64(p.eta),
            fmt_f64(p.lambda),
            p.family.to_string(),
            fmt_f64(p.shift),
            p.absorbed.to_string(),
        ]);
    }
    t
}

/// Values of `2η/δ` where the Lorentzian and Gaussian shift curves cross,
/// located by bisection between sign changes on `ratios`.
pub fn family_crossings(lambda: f64, separation_ratio: f64, ratios: &[f64]) -> Result<Vec<f64>> {
    let diff = |r: f64| -> Result<f64> {
        let eta = r * separation_ratio / 2.0;
        let l = TwoPeakModel::new(1.0, separation_ratio, lambda, Filter::lorentzian(eta)?)?;
        let g = TwoPeakModel::new(1.0, separation_ratio, lambda, Filter::gaussian(eta)?)?;
        Ok(peak_shift(&l).shift - peak_shift(&g).shift)
    };
    let mut out = Vec::new();
    for w in ratios.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (diff(a)?, diff(b)?);
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if diff(m)?.signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}
