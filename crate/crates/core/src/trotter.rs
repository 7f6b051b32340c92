//! Trotter-Suzuki product formulas, filter functions and the filtered
//! truncation-error bound with the derived circuit-depth cutoff.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{self, SpinModel};

/// Product-formula order `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum TrotterOrder {
    First,
    Second,
    Fourth,
}

impl TrotterOrder {
    pub const ALL: [TrotterOrder; 3] = [Self::First, Self::Second, Self::Fourth];

    pub fn from_int(p: u8) -> Result<Self> {
        match p {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            4 => Ok(Self::Fourth),
            _ => Err(param(format!("Trotter order must be 1, 2 or 4, got {p}"))),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Self::First => 1,
            Self::Second => 2,
            Self::Fourth => 4,
        }
    }

    /// Gate count per Trotter iteration used for circuit depths:
    /// `N`, `2N − 1` and `6N − 1`.
    pub fn gates_per_iteration(self, n_spins: usize) -> usize {
        match self {
            Self::First => n_spins,
            Self::Second => 2 * n_spins - 1,
            Self::Fourth => 6 * n_spins - 1,
        }
    }
}

impl TryFrom<u8> for TrotterOrder {
    type Error = Error;
    fn try_from(p: u8) -> Result<Self> {
        Self::from_int(p)
    }
}

impl From<TrotterOrder> for u8 {
    fn from(p: TrotterOrder) -> u8 {
        p.as_int()
    }
}

impl fmt::Display for TrotterOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

/// Suzuki's fourth-order weight `κ₄ = 1/(4 − 4^{1/3})`.
pub fn kappa4() -> f64 {
    1.0 / (4.0 - 4.0_f64.cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterFamily {
    None,
    Lorentzian,
    Gaussian,
}

impl FromStr for FilterFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "n" => Ok(Self::None),
            "lorentzian" | "l" => Ok(Self::Lorentzian),
            "gaussian" | "g" => Ok(Self::Gaussian),
            other => Err(param(format!("unknown filter family '{other}'"))),
        }
    }
}

impl fmt::Display for FilterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Lorentzian => "lorentzian",
            Self::Gaussian => "gaussian",
        })
    }
}

/// Time-domain filter `F(t)` with broadening `η` (the half width at half
/// maximum of the corresponding line shape).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub family: FilterFamily,
    pub eta: f64,
}

impl Filter {
    pub fn new(family: FilterFamily, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(param(format!("broadening must be finite and non-negative, got {eta}")));
        }
        Ok(Self { family, eta })
    }

    pub fn none() -> Self {
        Self {
            family: FilterFamily::None,
            eta: 0.0,
        }
    }

    pub fn lorentzian(eta: f64) -> Result<Self> {
        Self::new(FilterFamily::Lorentzian, eta)
    }

    pub fn gaussian(eta: f64) -> Result<Self> {
        Self::new(FilterFamily::Gaussian, eta)
    }

    /// Gaussian width `σ = η/√(2 ln 2)`.
    pub fn sigma(&self) -> f64 {
        self.eta / (2.0 * std::f64::consts::LN_2).sqrt()
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.family {
            FilterFamily::None => 1.0,
            FilterFamily::Lorentzian => (-self.eta * t.abs()).exp(),
            FilterFamily::Gaussian => {
                let s = self.sigma();
                (-0.5 * s * s * t * t).exp()
            }
        }
    }
}

/// Order `p` and number of steps `M` of a product-formula propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub order: TrotterOrder,
    pub steps: u64,
}

impl TrotterPlan {
    pub fn new(order: TrotterOrder, steps: u64) -> Result<Self> {
        if steps == 0 {
            return Err(param("the number of Trotter steps must be at least 1"));
        }
        Ok(Self { order, steps })
    }
}

/// `e^{−iH₁τ}` as its diagonal.
fn ising_phases(diag: &[f64], tau: f64) -> Vec<Complex64> {
    diag.iter().map(|&d| Complex64::from_polar(1.0, -d * tau)).collect()
}

/// `e^{−iH₂τ} = ⊗_j (cos(hτ) I + i sin(hτ) X)`.
fn field_exponential(model: &SpinModel, tau: f64) -> CMatrix {
    let (s, c) = (model.field * tau).sin_cos();
    let factor = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from(c),
            Complex64::new(0.0, s),
            Complex64::new(0.0, s),
            Complex64::from(c),
        ],
    );
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..model.n_spins {
        out = linalg::kron(&factor, &out);
    }
    out
}

/// `diag(left) · m · diag(right)`.
fn sandwich(left: &[Complex64], m: &CMatrix, right: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| left[r] * m[(r, c)] * right[c])
}

fn second_order_step(model: &SpinModel, diag: &[f64], dt: f64) -> CMatrix {
    let half = ising_phases(diag, dt / 2.0);
    sandwich(&half, &field_exponential(model, dt), &half)
}

/// A single product-formula step `U^(p)(dt)`; negative `dt` is allowed.
pub fn single_step_unitary(model: &SpinModel, order: TrotterOrder, dt: f64) -> Result<CMatrix> {
    let diag = model.ising_diagonal()?;
    Ok(match order {
        TrotterOrder::First => {
            let ones = vec![Complex64::from(1.0); diag.len()];
            sandwich(&ising_phases(&diag, dt), &field_exponential(model, dt), &ones)
        }
        TrotterOrder::Second => second_order_step(model, &diag, dt),
        TrotterOrder::Fourth => {
            let k = kappa4();
            let outer = second_order_step(model, &diag, k * dt);
            let outer2 = &outer * &outer;
            let middle = second_order_step(model, &diag, (1.0 - 4.0 * k) * dt);
            &outer2 * middle * &outer2
        }
    })
}

/// `U_M(t) = U^(p)(t/M)^M`.
pub fn trotter_propagator(model: &SpinModel, plan: TrotterPlan, t: f64) -> Result<CMatrix> {
    let step = single_step_unitary(model, plan.order, t / plan.steps as f64)?;
    Ok(linalg::matrix_power(&step, plan.steps))
}

/// `e^{−iHt}` from exact diagonalization.
pub fn exact_propagator(model: &SpinModel, t: f64) -> Result<CMatrix> {
    Ok(model::exact_diagonalize(model)?.propagator(t))
}

/// Filtered truncation-error bound `C^(p) |t|^{p+1} F(t) / M^p`.
pub fn truncation_error_bound(model: &SpinModel, plan: TrotterPlan, t: f64, filter: &Filter) -> f64 {
    let c = model::commutator_norm_bounds(model, plan.order).prefactor;
    let p = plan.order.as_int() as i32;
    c * t.abs().powi(p + 1) * filter.value(t) / (plan.steps as f64).powi(p)
}

/// Number of Trotter steps and circuit depth needed to keep the filtered
/// bound at `epsilon` up to time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthCutoff {
    pub order: TrotterOrder,
    pub time: f64,
    pub epsilon: f64,
    pub prefactor: f64,
    /// `M_c`, not rounded.
    pub steps: f64,
    pub gates_per_iteration: usize,
    /// `D_c = N_g · M_c`.
    pub depth: f64,
}

impl DepthCutoff {
    pub fn steps_ceil(&self) -> u64 {
        self.steps.ceil().max(1.0) as u64
    }
}

pub fn depth_cutoff(
    model: &SpinModel,
    order: TrotterOrder,
    t: f64,
    epsilon: f64,
    filter: &Filter,
) -> Result<DepthCutoff> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(param(format!("error threshold must be positive, got {epsilon}")));
    }
    if !t.is_finite() {
        return Err(param("time must be finite"));
    }
    let prefactor = model::commutator_norm_bounds(model, order).prefactor;
    let inv_p = 1.0 / order.as_int() as f64;
    let steps = (prefactor / epsilon).powf(inv_p) * t.abs().powf(1.0 + inv_p) * filter.value(t).powf(inv_p);
    let gates = order.gates_per_iteration(model.n_spins);
    Ok(DepthCutoff {
        order,
        time: t,
        epsilon,
        prefactor,
        steps,
        gates_per_iteration: gates,
        depth: gates as f64 * steps,
    })
}

/// Operator-norm distance between the product formula and `e^{−iHt}`.
pub fn trotter_error(model: &SpinModel, plan: TrotterPlan, t: f64) -> Result<f64> {
    let diff = trotter_propagator(model, plan, t)? - exact_propagator(model, t)?;
    linalg::spectral_norm(&diff)
}
