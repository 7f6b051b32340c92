//! Statevector execution of the gap-estimation circuit: product-state input,
//! Trotterized evolution forward and backward in time, and the return
//! probability `P(t) = |⟨ψ|U_M(t)|ψ⟩|²`, optionally with binomial shot noise.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::io::{fmt_f64, Table};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::model::{EigenDecomposition, SpinModel, MAX_DENSE_SPINS};
use crate::trotter::{self, kappa4, TrotterOrder, TrotterPlan};

/// Per-site input angles `θ_j`, stored wrapped to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputOrientation {
    thetas: Vec<f64>,
}

impl InputOrientation {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(param("orientation needs at least one angle"));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(param("orientation angles must be finite"));
        }
        Ok(Self {
            thetas: thetas.into_iter().map(|t| t.rem_euclid(TAU)).collect(),
        })
    }

    pub fn uniform(n_spins: usize, theta: f64) -> Result<Self> {
        Self::new(vec![theta; n_spins])
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn n_spins(&self) -> usize {
        self.thetas.len()
    }
}

/// `⊗_j (cos(θ_j/2)|0⟩ + sin(θ_j/2)|1⟩)`.
pub fn prepare_input(orientation: &InputOrientation) -> Result<CVector> {
    let n = orientation.n_spins();
    if n > MAX_DENSE_SPINS {
        return Err(Error::Resource {
            n_spins: n,
            max_spins: MAX_DENSE_SPINS,
        });
    }
    let amps: Vec<(f64, f64)> = orientation
        .thetas
        .iter()
        .map(|t| ((t / 2.0).cos(), (t / 2.0).sin()))
        .collect();
    Ok(CVector::from_fn(1 << n, |b, _| {
        let a = amps
            .iter()
            .enumerate()
            .map(|(j, &(c, s))| if (b >> j) & 1 == 0 { c } else { s })
            .product::<f64>();
        Complex64::from(a)
    }))
}

/// Uniform time grid `t_n = n·δt`, `n ∈ [0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub length: usize,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(length: usize, dt: f64) -> Result<Self> {
        if length < 2 || !length.is_multiple_of(2) {
            return Err(param(format!("grid length must be even and at least 2, got {length}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(param(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { length, dt })
    }

    /// `δω = η/4`, `L = 2⌈7h/δω⌉`, `δt = 2π/(L δω)`.
    pub fn for_broadening(eta: f64, field: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(param(format!("broadening must be positive, got {eta}")));
        }
        let d_omega = eta / 4.0;
        // The small offset keeps exact quotients such as 7/0.005 from
        // rounding up to the next integer.
        let half = (7.0 * field / d_omega - 1e-9).ceil() as usize;
        let length = 2 * half.max(1);
        Self::new(length, TAU / (length as f64 * d_omega))
    }

    pub fn d_omega(&self) -> f64 {
        TAU / (self.length as f64 * self.dt)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.length).map(|n| self.time(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Sampling {
    Exact,
    Shots { shots: u64, seed: u64 },
}

impl Sampling {
    pub fn shots(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(param("shot count must be at least 1"));
        }
        Ok(Self::Shots { shots, seed })
    }
}

/// Native gates, `R^x(φ) = e^{−iφX/2}` and `R^{zz}(θ) = e^{−iθ Z_j Z_{j+1}/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { site: usize, angle: f64 },
    /// Acts on sites `site` and `site + 1`.
    Rzz { site: usize, angle: f64 },
}

impl Gate {
    pub fn apply(&self, state: &mut [Complex64]) {
        match *self {
            Gate::Rx { site, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let mis = Complex64::new(0.0, -s);
                let mask = 1usize << site;
                for b in 0..state.len() {
                    if b & mask == 0 {
                        let (a0, a1) = (state[b], state[b | mask]);
                        state[b] = a0 * c + a1 * mis;
                        state[b | mask] = a0 * mis + a1 * c;
                    }
                }
            }
            Gate::Rzz { site, angle } => {
                let aligned = Complex64::from_polar(1.0, -angle / 2.0);
                let anti = aligned.conj();
                for (b, amp) in state.iter_mut().enumerate() {
                    let differ = ((b >> site) ^ (b >> (site + 1))) & 1;
                    *amp *= if differ == 0 { aligned } else { anti };
                }
            }
        }
    }
}

/// One Trotter iteration in application order, repeated `repetitions` times.
#[derive(Debug, Clone, PartialEq)]
pub struct GateList {
    pub iteration: Vec<Gate>,
    pub repetitions: u64,
}

impl GateList {
    pub fn total_gates(&self) -> u64 {
        self.iteration.len() as u64 * self.repetitions
    }

    pub fn apply(&self, state: &mut CVector) {
        let s = state.as_mut_slice();
        for _ in 0..self.repetitions {
            for g in &self.iteration {
                g.apply(s);
            }
        }
    }
}

/// Literal gates in one iteration: `(N−1) R^{zz}` per Ising layer plus `N R^x`
/// per field layer.
pub fn literal_gates_per_iteration(order: TrotterOrder, n_spins: usize) -> usize {
    let (zz_layers, x_layers) = layer_counts(order);
    zz_layers * (n_spins - 1) + x_layers * n_spins
}

fn layer_counts(order: TrotterOrder) -> (usize, usize) {
    match order {
        TrotterOrder::First => (1, 1),
        TrotterOrder::Second => (2, 1),
        TrotterOrder::Fourth => (6, 5),
    }
}

enum Layer {
    Zz(f64),
    X(f64),
}

/// Layer fractions of `χ = −2Jt` and `φ = −2ht` in application order.
fn layer_schedule(order: TrotterOrder) -> Vec<Layer> {
    use Layer::{X, Zz};
    match order {
        TrotterOrder::First => vec![X(1.0), Zz(1.0)],
        TrotterOrder::Second => vec![Zz(0.5), X(1.0), Zz(0.5)],
        TrotterOrder::Fourth => {
            let k = kappa4();
            let mid = (1.0 - 3.0 * k) / 2.0;
            vec![
                Zz(k / 2.0),
                X(k),
                Zz(k),
                X(k),
                Zz(mid),
                X(1.0 - 4.0 * k),
                Zz(mid),
                X(k),
                Zz(k),
                X(k),
                Zz(k / 2.0),
            ]
        }
    }
}

/// Gate list realizing `U_M^(p)(t)`.
pub fn gate_sequence(model: &SpinModel, plan: TrotterPlan, t: f64) -> GateList {
    let m = plan.steps as f64;
    let chi = -2.0 * model.coupling * t / m;
    let phi = -2.0 * model.field * t / m;
    let mut iteration = Vec::with_capacity(literal_gates_per_iteration(plan.order, model.n_spins));
    for layer in layer_schedule(plan.order) {
        match layer {
            Layer::Zz(f) => iteration.extend(
                (0..model.n_spins - 1).map(|site| Gate::Rzz {
                    site,
                    angle: f * chi,
                }),
            ),
            Layer::X(f) => iteration.extend((0..model.n_spins).map(|site| Gate::Rx {
                site,
                angle: f * phi,
            })),
        }
    }
    GateList {
        iteration,
        repetitions: plan.steps,
    }
}

fn return_probability(psi: &CVector, evolved: &CVector) -> f64 {
    psi.dotc(evolved).norm_sqr().min(1.0)
}

fn overlap_with(u: &CMatrix, psi: &CVector) -> f64 {
    return_probability(psi, &(u * psi))
}

/// `|⟨ψ|U_M(t)|ψ⟩|²` from the dense propagator.
pub fn propagator_overlap(
    model: &SpinModel,
    plan: TrotterPlan,
    orientation: &InputOrientation,
    t: f64,
) -> Result<f64> {
    check_sizes(model, orientation)?;
    let psi = prepare_input(orientation)?;
    Ok(overlap_with(&trotter::trotter_propagator(model, plan, t)?, &psi))
}

/// The same overlap obtained by applying the gate list to the statevector.
pub fn propagator_overlap_by_gates(
    model: &SpinModel,
    plan: TrotterPlan,
    orientation: &InputOrientation,
    t: f64,
) -> Result<f64> {
    check_sizes(model, orientation)?;
    let psi = prepare_input(orientation)?;
    let mut state = psi.clone();
    gate_sequence(model, plan, t).apply(&mut state);
    Ok(return_probability(&psi, &state))
}

fn check_sizes(model: &SpinModel, orientation: &InputOrientation) -> Result<()> {
    if orientation.n_spins() != model.n_spins {
        return Err(Error::Data(format!(
            "orientation has {} angles for a {}-spin chain",
            orientation.n_spins(),
            model.n_spins
        )));
    }
    Ok(())
}

/// Where a time series came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: SpinModel,
    /// `None` for exactly evolved series.
    pub plan: Option<TrotterPlan>,
    pub thetas: Vec<f64>,
    pub sampling: Sampling,
}

/// Return probabilities on both time branches, `P_n = P(t_n)` and
/// `P_{−n} = P(−t_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub provenance: Provenance,
}

impl TimeSeries {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["n", "t_n", "P_plus", "P_minus"]);
        t.meta("length", self.grid.length)
            .meta("dt", fmt_f64(self.grid.dt))
            .meta(
                "provenance",
                serde_json::to_string(&self.provenance).expect("provenance serializes"),
            );
        for n in 0..self.grid.length {
            t.push_row(vec![
                n.to_string(),
                fmt_f64(self.grid.time(n)),
                fmt_f64(self.plus[n]),
                fmt_f64(self.minus[n]),
            ]);
        }
        t
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let get = |k: &str| {
            table
                .metadata_value(k)
                .ok_or_else(|| Error::Data(format!("missing metadata '{k}'")))
        };
        let length: usize = get("length")?
            .parse()
            .map_err(|e| Error::Data(format!("length: {e}")))?;
        let dt: f64 = get("dt")?.parse().map_err(|e| Error::Data(format!("dt: {e}")))?;
        let provenance = serde_json::from_str(get("provenance")?)
            .map_err(|e| Error::Data(format!("provenance: {e}")))?;
        let plus = table.column_f64("P_plus")?;
        let minus = table.column_f64("P_minus")?;
        if plus.len() != length {
            return Err(Error::Data(format!("expected {length} rows, found {}", plus.len())));
        }
        Ok(Self {
            grid: TimeGrid::new(length, dt)?,
            plus,
            minus,
            provenance,
        })
    }
}

/// Independent generator for one sample, keyed by `(seed, n, branch)`.
fn sample_rng(seed: u64, n: usize, branch: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2 * n as u64 + branch);
    rng
}

fn sample(p: f64, sampling: Sampling, n: usize, branch: u64) -> Result<f64> {
    match sampling {
        Sampling::Exact => Ok(p),
        Sampling::Shots { shots, seed } => {
            let dist = Binomial::new(shots, p.clamp(0.0, 1.0))
                .map_err(|e| Error::Numeric(format!("binomial sampler: {e}")))?;
            let k = dist.sample(&mut sample_rng(seed, n, branch));
            Ok(k as f64 / shots as f64)
        }
    }
}

fn apply_sampling(
    exact: Vec<(f64, f64)>,
    grid: TimeGrid,
    sampling: Sampling,
    provenance: Provenance,
) -> Result<TimeSeries> {
    let pairs: Vec<(f64, f64)> = exact
        .into_par_iter()
        .enumerate()
        .map(|(n, (p, m))| Ok((sample(p, sampling, n, 0)?, sample(m, sampling, n, 1)?)))
        .collect::<Result<_>>()?;
    let (plus, minus) = pairs.into_iter().unzip();
    Ok(TimeSeries {
        grid,
        plus,
        minus,
        provenance,
    })
}

/// Time series for several input orientations sharing one set of
/// propagators; each orientation gets the same result as a standalone run.
pub fn run_time_series_batch(
    model: &SpinModel,
    plan: TrotterPlan,
    orientations: &[InputOrientation],
    grid: TimeGrid,
    sampling: Sampling,
) -> Result<Vec<TimeSeries>> {
    let states = orientations
        .iter()
        .map(|o| {
            check_sizes(model, o)?;
            prepare_input(o)
        })
        .collect::<Result<Vec<_>>>()?;
    // exact[n][k] = (P_k(t_n), P_k(−t_n))
    let exact: Vec<Vec<(f64, f64)>> = (0..grid.length)
        .into_par_iter()
        .map(|n| {
            if n == 0 {
                return Ok(vec![(1.0, 1.0); states.len()]);
            }
            let t = grid.time(n);
            let fwd = trotter::trotter_propagator(model, plan, t)?;
            let bwd = trotter::trotter_propagator(model, plan, -t)?;
            Ok(states
                .iter()
                .map(|psi| (overlap_with(&fwd, psi), overlap_with(&bwd, psi)))
                .collect())
        })
        .collect::<Result<_>>()?;
    orientations
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let column = exact.iter().map(|row| row[k]).collect();
            let provenance = Provenance {
                model: *model,
                plan: Some(plan),
                thetas: o.thetas().to_vec(),
                sampling,
            };
            apply_sampling(column, grid, sampling, provenance)
        })
        .collect()
}

pub fn run_time_series(
    model: &SpinModel,
    plan: TrotterPlan,
    orientation: &InputOrientation,
    grid: TimeGrid,
    sampling: Sampling,
) -> Result<TimeSeries> {
    let mut out = run_time_series_batch(model, plan, std::slice::from_ref(orientation), grid, sampling)?;
    Ok(out.remove(0))
}

/// Series for exact evolution `e^{−iHt}`, from the eigen-decomposition.
pub fn exact_time_series(
    model: &SpinModel,
    eig: &EigenDecomposition,
    orientation: &InputOrientation,
    grid: TimeGrid,
) -> Result<TimeSeries> {
    check_sizes(model, orientation)?;
    let weights: Vec<f64> = eig
        .overlaps(&prepare_input(orientation)?)
        .iter()
        .map(|c| c.norm_sqr())
        .collect();
    let at = |t: f64| {
        let amp: Complex64 = weights
            .iter()
            .zip(&eig.energies)
            .fold(ZERO, |acc, (&w, &e)| acc + Complex64::from_polar(w, -e * t));
        amp.norm_sqr().min(1.0)
    };
    let exact = (0..grid.length)
        .map(|n| {
            let t = grid.time(n);
            (at(t), at(-t))
        })
        .collect();
    let provenance = Provenance {
        model: *model,
        plan: None,
        thetas: orientation.thetas().to_vec(),
        sampling: Sampling::Exact,
    };
    apply_sampling(exact, grid, Sampling::Exact, provenance)
}

/// `θ_l = lπ/50` for `l ∈ [0, 24]`.
pub fn default_theta_grid() -> Vec<f64> {
    (0..25).map(|l| l as f64 * PI / 50.0).collect()
}
