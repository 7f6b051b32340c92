//! Windowed peak search for the lowest gap, the three error measures, and
//! the orientation and depth sweeps built on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::model::{self, EigenDecomposition, SpinModel};
use crate::simulator::{self, InputOrientation, Sampling, TimeGrid};
use crate::spectral::{self, Spectrum};
use crate::trotter::{Filter, FilterFamily, TrotterOrder, TrotterPlan};

/// `ε_gap` at or above this value marks an orientation as unfavored.
pub const UNFAVORED_GAP_ERROR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSearchConfig {
    /// `Δ₀`, the center of every search window.
    pub initial_guess: f64,
    /// `δΔ`, the full width of the first window.
    pub initial_window: f64,
    pub widen_factor: f64,
    pub max_window: f64,
    pub require_local_max: bool,
    /// Parabolic sub-grid refinement of the peak center. Off by default.
    pub refine: bool,
}

impl GapSearchConfig {
    /// Window `2η` widened by 1.5 up to `10η`.
    pub fn for_filter(initial_guess: f64, eta: f64) -> Result<Self> {
        Self {
            initial_guess,
            initial_window: 2.0 * eta,
            widen_factor: 1.5,
            max_window: 10.0 * eta,
            require_local_max: true,
            refine: false,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.initial_window > 0.0 && self.initial_window.is_finite()) {
            return Err(param("search window must be positive"));
        }
        if !(self.widen_factor > 1.0) {
            return Err(param("widen factor must exceed 1"));
        }
        if !(self.max_window >= self.initial_window) {
            return Err(param("maximum window must not be below the initial window"));
        }
        if !self.initial_guess.is_finite() {
            return Err(param("initial guess must be finite"));
        }
        Ok(self)
    }

    /// The successive window widths tried by [`find_gap`].
    pub fn windows(&self) -> Vec<f64> {
        let mut out = vec![self.initial_window];
        let mut w = self.initial_window;
        while w < self.max_window {
            w = (w * self.widen_factor).min(self.max_window);
            out.push(w);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub gap: f64,
    /// `A_gap = A(ω = Δ)`.
    pub peak_height: f64,
    pub window_used: f64,
    pub index: usize,
    pub theta: Option<f64>,
}

fn is_local_max(values: &[f64], m: usize) -> bool {
    m >= 1 && m + 1 < values.len() && values[m] > values[m - 1] && values[m] > values[m + 1]
}

/// Vertex of the parabola through the three samples around `m`.
fn parabolic_vertex(s: &Spectrum, m: usize) -> (f64, f64) {
    let (a, b, c) = (s.values[m - 1], s.values[m], s.values[m + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return (s.omegas[m], b);
    }
    let offset = 0.5 * (a - c) / denom;
    let step = s.omegas[m + 1] - s.omegas[m];
    (s.omegas[m] + offset * step, b - 0.25 * (a - c) * offset)
}

/// Highest admissible maximum inside `[Δ₀ − δΔ/2, Δ₀ + δΔ/2]`, widening the
/// window until one is found. The zero-frequency bin is never a candidate.
pub fn find_gap(spectrum: &Spectrum, config: &GapSearchConfig) -> Result<GapEstimate> {
    let config = config.validated()?;
    if spectrum.len() < 3 {
        return Err(Error::Data("spectrum too short for a peak search".into()));
    }
    for window in config.windows() {
        let (lo, hi) = (config.initial_guess - window / 2.0, config.initial_guess + window / 2.0);
        let best = (1..spectrum.len())
            .filter(|&m| (lo..=hi).contains(&spectrum.omegas[m]))
            .filter(|&m| !config.require_local_max || is_local_max(&spectrum.values, m))
            .max_by(|&a, &b| spectrum.values[a].total_cmp(&spectrum.values[b]));
        if let Some(m) = best {
            let (gap, peak_height) = if config.refine && is_local_max(&spectrum.values, m) {
                parabolic_vertex(spectrum, m)
            } else {
                (spectrum.omegas[m], spectrum.values[m])
            };
            return Ok(GapEstimate {
                gap,
                peak_height,
                window_used: window,
                index: m,
                theta: None,
            });
        }
    }
    Err(Error::SearchFailure {
        center: config.initial_guess,
        max_window: config.max_window,
    })
}

/// `ε_gap = |Δ − Δ_exact| / Δ_exact`.
pub fn gap_error(gap: f64, exact_gap: f64) -> Result<f64> {
    if exact_gap == 0.0 || !exact_gap.is_finite() {
        return Err(param("relative gap error needs a non-zero reference gap"));
    }
    Ok((gap - exact_gap).abs() / exact_gap.abs())
}

/// Normalized residual `sqrt(Σ(a − b)² / Σ(a − ā)²)`.
fn normalized_residual(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Data("spectra are on different grids".into()));
    }
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = a.iter().map(|x| (x - mean).powi(2)).sum();
    if den == 0.0 {
        return Err(Error::Numeric("spectrum has zero variance".into()));
    }
    Ok((num / den).sqrt())
}

/// `ε_spect`, normalized by the variance of the simulated spectrum.
pub fn spectral_error(sim: &Spectrum, exact: &Spectrum) -> Result<f64> {
    normalized_residual(&sim.values, &exact.values)
}

/// `ε_bound`: the same residual for the norm-bound spectra `Â_exact` (series
/// of ones) and `Â = Â_exact + δÂ` (series `C^(p)|t|^{p+1}/M^p`).
pub fn spectral_error_bound(
    model: &SpinModel,
    plan: TrotterPlan,
    filter: &Filter,
    grid: TimeGrid,
) -> Result<f64> {
    let c = model::commutator_norm_bounds(model, plan.order).prefactor;
    let p = plan.order.as_int() as i32;
    let ones = vec![1.0; grid.length];
    let delta: Vec<f64> = grid
        .times()
        .into_iter()
        .map(|t| c * t.abs().powi(p + 1) / (plan.steps as f64).powi(p))
        .collect();
    let (base, _) = spectral::filtered_transform(grid, filter, &ones, &ones)?;
    let (extra, _) = spectral::filtered_transform(grid, filter, &delta, &delta)?;
    let bounded: Vec<f64> = base.iter().zip(&extra).map(|(a, b)| a + b).collect();
    normalized_residual(&bounded, &base)
}

/// Everything needed to run and score the pipeline for one chain.
#[derive(Debug, Clone)]
pub struct Reference {
    pub model: SpinModel,
    pub eig: EigenDecomposition,
    pub exact_gap: f64,
}

impl Reference {
    pub fn new(model: SpinModel) -> Result<Self> {
        let eig = model::exact_diagonalize(&model)?;
        let exact_gap = eig.lowest_gap();
        Ok(Self {
            model,
            eig,
            exact_gap,
        })
    }
}

/// Outcome for one input orientation. `error` is set when the search failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub theta: f64,
    pub gap: Option<f64>,
    pub eps_gap: Option<f64>,
    pub peak_height: Option<f64>,
    pub eps_spect: Option<f64>,
    pub error: Option<String>,
}

impl ThetaPoint {
    pub fn unfavored(&self) -> bool {
        self.eps_gap.is_none_or(|e| e >= UNFAVORED_GAP_ERROR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<ThetaPoint>,
    /// Orientations with `ε_gap ≥ 10⁻²` or a failed search.
    pub unfavored: Vec<f64>,
    /// Orientation with the tallest gap peak.
    pub best: Option<ThetaPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

/// Gap estimates over uniform orientations, sharing one set of propagators.
/// The search starts at the perturbative guess; failures are recorded per
/// point and do not abort the sweep.
pub fn theta_sweep(
    reference: &Reference,
    plan: TrotterPlan,
    filter: &Filter,
    grid: TimeGrid,
    thetas: &[f64],
    sampling: Sampling,
) -> Result<SweepResult> {
    let model = &reference.model;
    let orientations = thetas
        .iter()
        .map(|&t| InputOrientation::uniform(model.n_spins, t))
        .collect::<Result<Vec<_>>>()?;
    let series = simulator::run_time_series_batch(model, plan, &orientations, grid, sampling)?;
    let config = GapSearchConfig::for_filter(model::perturbative_gap_guess(model), filter.eta.max(grid.d_omega()))?;
    let mut points = Vec::with_capacity(thetas.len());
    for ((&theta, o), ts) in thetas.iter().zip(&orientations).zip(&series) {
        let spectrum = spectral::spectral_function(ts, filter)?;
        let eps_spect = if filter.family != FilterFamily::None && filter.eta > 0.0 {
            let oracle = spectral::exact_spectrum_oracle(model, &reference.eig, o, filter, grid)?;
            spectral_error(&spectrum, &oracle).ok()
        } else {
            None
        };
        points.push(match find_gap(&spectrum, &config) {
            Ok(est) => ThetaPoint {
                theta,
                gap: Some(est.gap),
                eps_gap: Some(gap_error(est.gap, reference.exact_gap)?),
                peak_height: Some(est.peak_height),
                eps_spect,
                error: None,
            },
            Err(e @ Error::SearchFailure { .. }) => ThetaPoint {
                theta,
                gap: None,
                eps_gap: None,
                peak_height: None,
                eps_spect,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        });
    }
    let unfavored = points.iter().filter(|p| p.unfavored()).map(|p| p.theta).collect();
    let best = points
        .iter()
        .filter(|p| p.peak_height.is_some())
        .max_by(|a, b| a.peak_height.unwrap().total_cmp(&b.peak_height.unwrap()))
        .cloned();
    Ok(SweepResult {
        points,
        unfavored,
        best,
    })
}

/// One point of a convergence study in the Trotter depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRecord {
    pub theta: f64,
    pub eta: f64,
    pub filter: FilterFamily,
    pub p: TrotterOrder,
    #[serde(rename = "M")]
    pub steps: u64,
    /// Circuit depth `N_g · M`.
    #[serde(rename = "D")]
    pub depth: u64,
    pub gap: Option<f64>,
    pub eps_gap: Option<f64>,
    pub eps_spect: Option<f64>,
    pub eps_bound: f64,
    pub peak_height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Gap, spectral error and its bound for each depth in `steps`.
pub fn depth_sweep(
    reference: &Reference,
    order: TrotterOrder,
    filter: &Filter,
    grid: TimeGrid,
    theta: f64,
    steps: &[u64],
    sampling: Sampling,
) -> Result<Vec<DepthRecord>> {
    let model = &reference.model;
    let orientation = InputOrientation::uniform(model.n_spins, theta)?;
    let oracle = if filter.family != FilterFamily::None && filter.eta > 0.0 {
        Some(spectral::exact_spectrum_oracle(model, &reference.eig, &orientation, filter, grid)?)
    } else {
        None
    };
    let config = GapSearchConfig::for_filter(model::perturbative_gap_guess(model), filter.eta.max(grid.d_omega()))?;
    let gates = order.gates_per_iteration(model.n_spins) as u64;
    steps
        .iter()
        .map(|&m| {
            let plan = TrotterPlan::new(order, m)?;
            let ts = simulator::run_time_series(model, plan, &orientation, grid, sampling)?;
            let spectrum = spectral::spectral_function(&ts, filter)?;
            let eps_spect = match &oracle {
                Some(o) => Some(spectral_error(&spectrum, o)?),
                None => None,
            };
            let eps_bound = spectral_error_bound(model, plan, filter, grid)?;
            let mut rec = DepthRecord {
                theta,
                eta: filter.eta,
                filter: filter.family,
                p: order,
                steps: m,
                depth: gates * m,
                gap: None,
                eps_gap: None,
                eps_spect,
                eps_bound,
                peak_height: None,
                error: None,
            };
            match find_gap(&spectrum, &config) {
                Ok(est) => {
                    rec.gap = Some(est.gap);
                    rec.eps_gap = Some(gap_error(est.gap, reference.exact_gap)?);
                    rec.peak_height = Some(est.peak_height);
                }
                Err(e @ Error::SearchFailure { .. }) => rec.error = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            Ok(rec)
        })
        .collect()
}

/// Smallest depth from which `ε_gap` stays within 10% of its value at the
/// deepest record.
pub fn empirical_depth_cutoff(records: &[DepthRecord]) -> Option<u64> {
    let mut sorted: Vec<&DepthRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.depth);
    let plateau = sorted.last()?.eps_gap?;
    let near = |r: &DepthRecord| r.eps_gap.is_some_and(|e| (e - plateau).abs() <= 0.1 * plateau);
    let mut cutoff = None;
    for r in sorted.iter().rev() {
        if near(r) {
            cutoff = Some(r.depth);
        } else {
            break;
        }
    }
    cutoff
}

/// `θ_l = lπ/50`, `l ∈ [0, 24]`.
pub fn default_thetas() -> Vec<f64> {
    simulator::default_theta_grid()
}

/// Uniform orientation used when none is given, `θ = 0.27π`.
pub const DEFAULT_THETA: f64 = 0.27 * PI;
