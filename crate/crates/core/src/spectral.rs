//! Discrete spectral function of a filtered time series and its exact
//! counterpart from the eigen-decomposition.
//!
//! On a grid with `L` points, `δω·δt = 2π/L`, the transform is
//!
//! ```text
//! A_m = δt/2π · Re Σ_{s=±} Σ_n w_n e^{iω_m t_{sn}} F_n P_{sn},   w_0 = 1/2, w_n = 1 otherwise.
//! ```
//!
//! The `n = 0` sample is shared by both time branches and is counted once in
//! total. The spectrum is periodic in `ω` with period `L·δω`; indices
//! `m ≥ L/2` hold the negative frequencies.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::io::{fmt_f64, Table};
use crate::model::{EigenDecomposition, SpinModel};
use crate::simulator::{self, InputOrientation, Provenance, TimeGrid, TimeSeries};
use crate::trotter::{Filter, FilterFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub d_omega: f64,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub filter: Filter,
    /// Largest magnitude of the discarded imaginary part of the transform.
    pub imaginary_residue: f64,
    pub provenance: Option<Provenance>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the grid point closest to `omega`.
    pub fn index_of(&self, omega: f64) -> usize {
        let mut best = 0;
        for (m, w) in self.omegas.iter().enumerate() {
            if (w - omega).abs() < (self.omegas[best] - omega).abs() {
                best = m;
            }
        }
        best
    }

    pub fn to_table(&self) -> Table {
        self.table_with(None)
    }

    /// Table with an extra `A_exact` column taken from `reference`.
    pub fn to_table_with_reference(&self, reference: &Spectrum) -> Result<Table> {
        if reference.len() != self.len() {
            return Err(Error::Data("reference spectrum is on a different grid".into()));
        }
        Ok(self.table_with(Some(reference)))
    }

    fn table_with(&self, reference: Option<&Spectrum>) -> Table {
        let mut cols = vec!["m", "omega", "A"];
        if reference.is_some() {
            cols.push("A_exact");
        }
        let mut t = Table::new(cols);
        t.meta("d_omega", fmt_f64(self.d_omega))
            .meta("filter", serde_json::to_string(&self.filter).expect("filter serializes"))
            .meta("imaginary_residue", fmt_f64(self.imaginary_residue));
        if let Some(p) = &self.provenance {
            t.meta("provenance", serde_json::to_string(p).expect("provenance serializes"));
        }
        for m in 0..self.len() {
            let mut row = vec![m.to_string(), fmt_f64(self.omegas[m]), fmt_f64(self.values[m])];
            if let Some(r) = reference {
                row.push(fmt_f64(r.values[m]));
            }
            t.push_row(row);
        }
        t
    }
}

/// `cos` and `sin` of `2πk/L` for `k ∈ [0, L)`.
fn twiddles(length: usize) -> (Vec<f64>, Vec<f64>) {
    (0..length)
        .map(|k| (TAU * k as f64 / length as f64).sin_cos())
        .map(|(s, c)| (c, s))
        .unzip()
}

/// Real and imaginary parts of the filtered transform of two branches.
pub fn filtered_transform(
    grid: TimeGrid,
    filter: &Filter,
    plus: &[f64],
    minus: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = grid.length;
    if plus.len() != l || minus.len() != l {
        return Err(Error::Data(format!(
            "series lengths ({}, {}) do not match the grid length {l}",
            plus.len(),
            minus.len()
        )));
    }
    let weighted: Vec<(f64, f64)> = (0..l)
        .map(|n| {
            let w = if n == 0 { 0.5 } else { 1.0 } * filter.value(grid.time(n));
            (w * (plus[n] + minus[n]), w * (plus[n] - minus[n]))
        })
        .collect();
    let (cos, sin) = twiddles(l);
    let norm = grid.dt / TAU;
    Ok((0..l)
        .into_par_iter()
        .map(|m| {
            let (mut re, mut im) = (0.0, 0.0);
            let mut k = 0usize;
            for &(even, odd) in &weighted {
                re += cos[k] * even;
                im += sin[k] * odd;
                k += m;
                if k >= l {
                    k -= l;
                }
            }
            (norm * re, norm * im)
        })
        .unzip())
}

pub fn spectral_function(series: &TimeSeries, filter: &Filter) -> Result<Spectrum> {
    let grid = series.grid;
    let (values, imag) = filtered_transform(grid, filter, &series.plus, &series.minus)?;
    let d_omega = grid.d_omega();
    Ok(Spectrum {
        d_omega,
        omegas: (0..grid.length).map(|m| m as f64 * d_omega).collect(),
        values,
        filter: *filter,
        imaginary_residue: imag.iter().fold(0.0_f64, |a, x| a.max(x.abs())),
        provenance: Some(series.provenance.clone()),
    })
}

/// Normalized line shape `F̃(ω)`.
pub fn filter_fourier(filter: &Filter, omega: f64) -> Result<f64> {
    if filter.eta <= 0.0 || filter.family == FilterFamily::None {
        return Err(param("the line shape of an unbroadened filter is a delta function"));
    }
    Ok(match filter.family {
        FilterFamily::Lorentzian => filter.eta / (PI * (omega * omega + filter.eta * filter.eta)),
        FilterFamily::Gaussian => {
            let s = filter.sigma();
            (-omega * omega / (2.0 * s * s)).exp() / ((TAU).sqrt() * s)
        }
        FilterFamily::None => unreachable!(),
    })
}

/// `Σ_k F̃(ω + kT)`, the line shape as seen by a transform with frequency
/// period `T`.
pub fn periodized_line_shape(filter: &Filter, omega: f64, period: f64) -> Result<f64> {
    if !(period.is_finite() && period > 0.0) {
        return Err(param("period must be positive"));
    }
    // Reduce to [−T/2, T/2).
    let w = (omega + period / 2.0).rem_euclid(period) - period / 2.0;
    match filter.family {
        FilterFamily::Lorentzian if filter.eta > 0.0 => {
            let a = TAU * filter.eta / period;
            let b = TAU * w / period;
            Ok(a.sinh() / (period * (a.cosh() - b.cos())))
        }
        _ => {
            let reach = 40.0 * filter.sigma().max(filter.eta);
            let mut total = filter_fourier(filter, w)?;
            let mut k = 1.0;
            while k * period - period / 2.0 <= reach {
                total += filter_fourier(filter, w + k * period)? + filter_fourier(filter, w - k * period)?;
                k += 1.0;
            }
            Ok(total)
        }
    }
}

/// `A(ω) = Σ_{u,v} |c_u|²|c_v|² F̃(ω − (E_u − E_v))` on the transform grid,
/// with line shapes periodized to match the discrete transform.
pub fn exact_spectrum_oracle(
    model: &SpinModel,
    eig: &EigenDecomposition,
    orientation: &InputOrientation,
    filter: &Filter,
    grid: TimeGrid,
) -> Result<Spectrum> {
    if orientation.n_spins() != model.n_spins {
        return Err(Error::Data("orientation does not match the chain".into()));
    }
    filter_fourier(filter, 0.0)?;
    let weights: Vec<f64> = eig
        .overlaps(&simulator::prepare_input(orientation)?)
        .iter()
        .map(|c| c.norm_sqr())
        .collect();
    let mut pairs = Vec::new();
    for (u, &wu) in weights.iter().enumerate() {
        for (v, &wv) in weights.iter().enumerate() {
            let w = wu * wv;
            if w > 1e-300 {
                pairs.push((w, eig.energies[u] - eig.energies[v]));
            }
        }
    }
    let d_omega = grid.d_omega();
    let period = grid.length as f64 * d_omega;
    let omegas: Vec<f64> = (0..grid.length).map(|m| m as f64 * d_omega).collect();
    let values = omegas
        .par_iter()
        .map(|&om| {
            pairs.iter().try_fold(0.0, |acc, &(w, gap)| {
                Ok(acc + w * periodized_line_shape(filter, om - gap, period)?)
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Spectrum {
        d_omega,
        omegas,
        values,
        filter: *filter,
        imaginary_residue: 0.0,
        provenance: Some(Provenance {
            model: *model,
            plan: None,
            thetas: orientation.thetas().to_vec(),
            sampling: simulator::Sampling::Exact,
        }),
    })
}

/// Pairwise gaps `E_u − E_v > 0` whose weight `|c_u|²|c_v|²` exceeds `min_weight`.
pub fn visible_gaps(eig: &EigenDecomposition, psi_weights: &[f64], min_weight: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (u, &wu) in psi_weights.iter().enumerate() {
        for (v, &wv) in psi_weights.iter().enumerate() {
            let gap = eig.energies[u] - eig.energies[v];
            if gap > 1e-9 && wu * wv > min_weight {
                out.push((gap, wu * wv));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
