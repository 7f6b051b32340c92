//! Finite-size extrapolation of gap estimates in `1/N` and the paramagnetic
//! phase diagram assembled from the extrapolated gaps.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{param, Error, Result};
use crate::gapfinder::{self, Reference};
use crate::io::{fmt_f64, Table};
use crate::model::{self, SpinModel};
use crate::simulator::{Sampling, TimeGrid};
use crate::trotter::{Filter, TrotterPlan};

/// Two-sided confidence level of all bands.
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    /// `(N, Δ_N)` pairs.
    pub points: Vec<(usize, f64)>,
    pub j_over_h: f64,
    /// Broadening used for the estimates; sets the `[Δ − η, Δ + η]` fences.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub inv_n: f64,
    pub fit: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub j_over_h: f64,
    /// `Δ_∞`, the fit at `1/N = 0`.
    pub intercept: f64,
    pub slope: f64,
    pub intercept_stderr: f64,
    pub t_quantile: f64,
    /// 95% interval on the intercept.
    pub confidence_band: (f64, f64),
    /// The fit and its band over `1/N ∈ [0, 1/2]`.
    pub band: Vec<BandPoint>,
}

/// Ordinary least squares of `Δ` against `1/N`.
pub fn extrapolate(sample: &ScalingSample) -> Result<Extrapolation> {
    let n = sample.points.len();
    if n < 3 {
        return Err(param(format!("extrapolation needs at least 3 points, got {n}")));
    }
    if sample.points.iter().any(|&(size, gap)| size == 0 || !(gap > 0.0)) {
        return Err(param("sizes must be positive and gaps strictly positive"));
    }
    let xs: Vec<f64> = sample.points.iter().map(|&(size, _)| 1.0 / size as f64).collect();
    let ys: Vec<f64> = sample.points.iter().map(|&(_, g)| g).collect();
    let nf = n as f64;
    let x_bar = xs.iter().sum::<f64>() / nf;
    let y_bar = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    if sxx <= 1e-15 {
        return Err(Error::Numeric("all sizes are equal; the regression is degenerate".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let s = (ssr / (nf - 2.0)).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::Numeric(format!("t distribution: {e}")))?
        .inverse_cdf(0.5 + CONFIDENCE / 2.0);
    let half_width = |x: f64| t * s * (1.0 / nf + (x - x_bar).powi(2) / sxx).sqrt();
    let band = (0..=50)
        .map(|k| {
            let x = 0.5 * k as f64 / 50.0;
            let fit = intercept + slope * x;
            BandPoint {
                inv_n: x,
                fit,
                lower: fit - half_width(x),
                upper: fit + half_width(x),
            }
        })
        .collect();
    let h0 = half_width(0.0);
    Ok(Extrapolation {
        j_over_h: sample.j_over_h,
        intercept,
        slope,
        intercept_stderr: if t > 0.0 { h0 / t } else { 0.0 },
        t_quantile: t,
        confidence_band: (intercept - h0, intercept + h0),
        band,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub j_over_h: f64,
    pub delta_inf: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// `2|1 − J/h|`.
    pub exact_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub rows: Vec<PhaseRow>,
}

impl PhaseDiagram {
    /// Band edges linearly interpolated at `j_over_h`, inside the sampled range.
    pub fn band_at(&self, j_over_h: f64) -> Option<(f64, f64)> {
        let rows = &self.rows;
        let k = rows.windows(2).position(|w| (w[0].j_over_h..=w[1].j_over_h).contains(&j_over_h));
        match k {
            Some(k) => {
                let (a, b) = (&rows[k], &rows[k + 1]);
                let s = (j_over_h - a.j_over_h) / (b.j_over_h - a.j_over_h);
                Some((
                    a.band_lo + s * (b.band_lo - a.band_lo),
                    a.band_hi + s * (b.band_hi - a.band_hi),
                ))
            }
            None => rows
                .iter()
                .find(|r| r.j_over_h == j_over_h)
                .map(|r| (r.band_lo, r.band_hi)),
        }
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["J_over_h", "delta_inf", "band_lo", "band_hi", "exact_ref"]);
        for r in &self.rows {
            t.push_row(vec![
                fmt_f64(r.j_over_h),
                fmt_f64(r.delta_inf),
                fmt_f64(r.band_lo),
                fmt_f64(r.band_hi),
                fmt_f64(r.exact_ref),
            ]);
        }
        t
    }
}

pub fn phase_diagram(extrapolations: &[Extrapolation]) -> PhaseDiagram {
    let mut rows: Vec<PhaseRow> = extrapolations
        .iter()
        .map(|e| PhaseRow {
            j_over_h: e.j_over_h,
            delta_inf: e.intercept,
            band_lo: e.confidence_band.0,
            band_hi: e.confidence_band.1,
            exact_ref: model::exact_gap_thermodynamic(e.j_over_h, 1.0),
        })
        .collect();
    rows.sort_by(|a, b| a.j_over_h.total_cmp(&b.j_over_h));
    PhaseDiagram { rows }
}

/// Perturbative gaps `Δ₀(N)` in units of `h`.
pub fn perturbative_sample(j_over_h: f64, sizes: &[usize], eta: f64) -> Result<ScalingSample> {
    let points = sizes
        .iter()
        .map(|&n| Ok((n, model::perturbative_gap_guess(&SpinModel::with_ratio(n, j_over_h)?))))
        .collect::<Result<_>>()?;
    Ok(ScalingSample {
        points,
        j_over_h,
        eta,
    })
}

/// Per-size record of a simulated sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    pub n_spins: usize,
    pub gap: f64,
    pub theta: f64,
    pub peak_height: f64,
    pub exact_gap: f64,
}

/// Runs the full pipeline for each size and keeps, per size, the estimate
/// from the orientation with the tallest gap peak.
pub fn collect_sample(
    j_over_h: f64,
    sizes: &[usize],
    plan: TrotterPlan,
    filter: &Filter,
    thetas: &[f64],
    sampling: Sampling,
) -> Result<(ScalingSample, Vec<SizeEstimate>)> {
    let grid = TimeGrid::for_broadening(filter.eta, 1.0)?;
    let mut details = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let reference = Reference::new(SpinModel::with_ratio(n, j_over_h)?)?;
        let sweep = gapfinder::theta_sweep(&reference, plan, filter, grid, thetas, sampling)?;
        let best = sweep.best.ok_or(Error::SearchFailure {
            center: model::perturbative_gap_guess(&reference.model),
            max_window: 10.0 * filter.eta,
        })?;
        details.push(SizeEstimate {
            n_spins: n,
            gap: best.gap.expect("best point has a gap"),
            theta: best.theta,
            peak_height: best.peak_height.expect("best point has a peak"),
            exact_gap: reference.exact_gap,
        });
    }
    let sample = ScalingSample {
        points: details.iter().map(|d| (d.n_spins, d.gap)).collect(),
        j_over_h,
        eta: filter.eta,
    };
    Ok((sample, details))
}
