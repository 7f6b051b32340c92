//! The open transverse-field Ising chain
//!
//! ```text
//! H = H₁ + H₂,   H₁ = −J Σ_{j=0}^{N−2} σᶻ_j σᶻ_{j+1},   H₂ = −h Σ_{j=0}^{N−1} σˣ_j
//! ```
//!
//! together with its exact diagonalization, the nested commutators that set
//! the Trotter error prefactors, and reference formulas for the lowest gap.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE};
use crate::pauli::{Pauli, PauliSum};
use crate::trotter::TrotterOrder;

/// Largest chain for which dense `2^N × 2^N` matrices are built.
pub const MAX_DENSE_SPINS: usize = 12;

/// Largest chain for which the nested commutator matrices are built.
pub const MAX_COMMUTATOR_SPINS: usize = 10;

/// Second-order error constants `c_γ^(2)`, indexed by `γ − 1`.
pub const SECOND_ORDER_CONSTANTS: [f64; 2] = [0.083, 0.167];

/// Fourth-order error constants `c_{γλμ}^(4)`, indexed `[γ−1][λ−1][μ−1]`.
pub const FOURTH_ORDER_CONSTANTS: [[[f64; 2]; 2]; 2] = [
    [[0.0094, 0.0114], [0.0092, 0.0148]],
    [[0.0194, 0.0194], [0.0346, 0.0568]],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinModel {
    pub n_spins: usize,
    /// Ising coupling `J`.
    pub coupling: f64,
    /// Transverse field `h`.
    pub field: f64,
}

impl SpinModel {
    pub fn new(n_spins: usize, coupling: f64, field: f64) -> Result<Self> {
        if n_spins < 2 {
            return Err(param(format!("a chain needs at least 2 spins, got {n_spins}")));
        }
        if !coupling.is_finite() {
            return Err(param("coupling must be finite"));
        }
        if !(field.is_finite() && field > 0.0) {
            return Err(param(format!("field must be positive, got {field}")));
        }
        Ok(Self {
            n_spins,
            coupling,
            field,
        })
    }

    /// Chain with `h = 1` and coupling `J/h`.
    pub fn with_ratio(n_spins: usize, j_over_h: f64) -> Result<Self> {
        Self::new(n_spins, j_over_h, 1.0)
    }

    pub fn dimension(&self) -> Result<usize> {
        self.check_dense(MAX_DENSE_SPINS)?;
        Ok(1 << self.n_spins)
    }

    fn check_dense(&self, max_spins: usize) -> Result<()> {
        if self.n_spins > max_spins {
            return Err(Error::Resource {
                n_spins: self.n_spins,
                max_spins,
            });
        }
        Ok(())
    }

    pub fn ising_pauli(&self) -> PauliSum {
        let mut s = PauliSum::zero(self.n_spins);
        for j in 0..self.n_spins - 1 {
            s.add_term(ONE * -self.coupling, &[(j, Pauli::Z), (j + 1, Pauli::Z)]);
        }
        s
    }

    pub fn field_pauli(&self) -> PauliSum {
        let mut s = PauliSum::zero(self.n_spins);
        for j in 0..self.n_spins {
            s.add_term(ONE * -self.field, &[(j, Pauli::X)]);
        }
        s
    }

    /// Diagonal of `H₁` in the computational basis.
    pub fn ising_diagonal(&self) -> Result<Vec<f64>> {
        let dim = self.dimension()?;
        Ok((0..dim)
            .map(|b| {
                let aligned = (0..self.n_spins - 1)
                    .map(|j| {
                        if ((b >> j) ^ (b >> (j + 1))) & 1 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    })
                    .sum::<f64>();
                -self.coupling * aligned
            })
            .collect())
    }

    pub fn hamiltonian(&self) -> Result<CMatrix> {
        let (h1, h2) = build_hamiltonians(self)?;
        Ok(h1 + h2)
    }
}

/// Dense `H₁` and `H₂`.
pub fn build_hamiltonians(model: &SpinModel) -> Result<(CMatrix, CMatrix)> {
    model.check_dense(MAX_DENSE_SPINS)?;
    let diag = model.ising_diagonal()?;
    let h1 = CMatrix::from_diagonal(&CVector::from_iterator(
        diag.len(),
        diag.iter().map(|&d| Complex64::from(d)),
    ));
    Ok((h1, model.field_pauli().to_matrix()))
}

/// Energies (ascending) and eigenvectors (as columns) of `H`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub energies: Vec<f64>,
    pub states: CMatrix,
}

impl EigenDecomposition {
    /// Expansion coefficients `c_u = ⟨u|ψ⟩`.
    pub fn overlaps(&self, psi: &CVector) -> CVector {
        self.states.adjoint() * psi
    }

    /// Exact propagator `e^{−iHt}`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let phases = CVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        );
        let scaled = CMatrix::from_fn(self.states.nrows(), self.states.ncols(), |r, c| {
            self.states[(r, c)] * phases[c]
        });
        scaled * self.states.adjoint()
    }

    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        let mut c = self.overlaps(psi);
        for (cu, &e) in c.iter_mut().zip(&self.energies) {
            *cu *= Complex64::from_polar(1.0, -e * t);
        }
        &self.states * c
    }

    /// Difference between the first excited level and the ground level,
    /// skipping levels degenerate with the ground state.
    pub fn lowest_gap(&self) -> f64 {
        let e0 = self.energies[0];
        let scale = self.energies.iter().fold(1.0_f64, |a, e| a.max(e.abs()));
        self.energies
            .iter()
            .map(|e| e - e0)
            .find(|&d| d > 1e-9 * scale)
            .unwrap_or(0.0)
    }
}

pub fn exact_diagonalize(model: &SpinModel) -> Result<EigenDecomposition> {
    let h = model.hamiltonian()?;
    let (energies, states) = linalg::hermitian_eigen(&h)?;
    Ok(EigenDecomposition { energies, states })
}

/// Upper bounds on the nested commutators of `H̃₁ = H₁/|J|`, `H̃₂ = H₂/|h|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedBounds {
    /// `‖[H̃₁, H̃₂]‖ ≤ 4(N−1)`.
    pub first: f64,
    /// `‖[H̃_γ, [H̃₁, H̃₂]]‖ ≤ 16(N−1)`.
    pub second: f64,
    /// Mixed four-fold nesting (`λ ≠ μ`): `≤ 128(N−2)`.
    pub mixed_fourth: f64,
    /// Repeated four-fold nesting (`λ = μ`): `≤ 256(N−1)`.
    pub repeated_fourth: f64,
}

impl NormalizedBounds {
    pub fn for_chain(n_spins: usize) -> Self {
        let bonds = n_spins.saturating_sub(1) as f64;
        let inner = n_spins.saturating_sub(2) as f64;
        Self {
            first: 4.0 * bonds,
            second: 16.0 * bonds,
            mixed_fourth: 128.0 * inner,
            // The repeated-λ=1 nesting equals 16J²[H_γ,[H₁,H₂]] up to boundary
            // terms, so both λ share the 16·16(N−1) bound.
            repeated_fourth: 256.0 * bonds,
        }
    }

    /// Bound on `‖[H̃_γ,[H̃_λ,[H̃_μ,[H̃₁,H̃₂]]]]‖` for indices in `{1, 2}`.
    pub fn fourth(&self, _gamma: usize, lambda: usize, mu: usize) -> f64 {
        if lambda == mu {
            self.repeated_fourth
        } else {
            self.mixed_fourth
        }
    }
}

/// Normalized commutator bounds plus the dimensionful prefactor `C^(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub order: TrotterOrder,
    pub prefactor: f64,
    pub normalized: NormalizedBounds,
}

/// `|J|^a |h|^b` with `a`, `b` counted from the nesting indices.
fn energy_scale(model: &SpinModel, n_coupling: i32, n_field: i32) -> f64 {
    model.coupling.abs().powi(n_coupling) * model.field.abs().powi(n_field)
}

pub fn commutator_norm_bounds(model: &SpinModel, order: TrotterOrder) -> BoundSet {
    let nb = NormalizedBounds::for_chain(model.n_spins);
    let count = |idx: &[usize], which: usize| idx.iter().filter(|&&i| i == which).count() as i32;
    let prefactor = match order {
        TrotterOrder::First => nb.first * energy_scale(model, 1, 1),
        TrotterOrder::Second => (1..=2)
            .map(|g| {
                SECOND_ORDER_CONSTANTS[g - 1]
                    * nb.second
                    * energy_scale(model, 1 + count(&[g], 1), 1 + count(&[g], 2))
            })
            .sum(),
        TrotterOrder::Fourth => {
            let mut total = 0.0;
            for g in 1..=2 {
                for l in 1..=2 {
                    for m in 1..=2 {
                        let idx = [g, l, m];
                        total += FOURTH_ORDER_CONSTANTS[g - 1][l - 1][m - 1]
                            * nb.fourth(g, l, m)
                            * energy_scale(model, 1 + count(&idx, 1), 1 + count(&idx, 2));
                    }
                }
            }
            total
        }
    };
    BoundSet {
        order,
        prefactor,
        normalized: nb,
    }
}

/// Nested commutators of `H₁`, `H₂`. Four-fold nestings are indexed
/// `[γ−1][λ−1][μ−1]` for `[H_γ,[H_λ,[H_μ,[H₁,H₂]]]]`.
#[derive(Debug, Clone)]
pub struct CommutatorSet<T> {
    pub c12: T,
    pub c112: T,
    pub c212: T,
    pub fourth: [[[T; 2]; 2]; 2],
}

impl<T> CommutatorSet<T> {
    pub fn fourth(&self, gamma: usize, lambda: usize, mu: usize) -> &T {
        &self.fourth[gamma - 1][lambda - 1][mu - 1]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> CommutatorSet<U> {
        CommutatorSet {
            c12: f(&self.c12),
            c112: f(&self.c112),
            c212: f(&self.c212),
            fourth: std::array::from_fn(|g| {
                std::array::from_fn(|l| std::array::from_fn(|m| f(&self.fourth[g][l][m])))
            }),
        }
    }

    /// Iterates `(label, item)` over all seven-plus-eight entries.
    pub fn labelled(&self) -> Vec<(String, &T)> {
        let mut out = vec![
            ("[H1,H2]".to_string(), &self.c12),
            ("[H1,[H1,H2]]".to_string(), &self.c112),
            ("[H2,[H1,H2]]".to_string(), &self.c212),
        ];
        for g in 1..=2 {
            for l in 1..=2 {
                for m in 1..=2 {
                    out.push((
                        format!("[H{g},[H{l},[H{m},[H1,H2]]]]"),
                        self.fourth(g, l, m),
                    ));
                }
            }
        }
        out
    }
}

/// Commutators by direct multiplication of dense `H₁`, `H₂`.
pub fn commutators_by_multiplication(model: &SpinModel) -> Result<CommutatorSet<CMatrix>> {
    model.check_dense(MAX_COMMUTATOR_SPINS)?;
    let (h1, h2) = build_hamiltonians(model)?;
    let hs = [&h1, &h2];
    let c12 = linalg::commutator(&h1, &h2);
    let c112 = linalg::commutator(&h1, &c12);
    let c212 = linalg::commutator(&h2, &c12);
    let inner = [&c112, &c212];
    let fourth = std::array::from_fn(|g| {
        std::array::from_fn(|l| {
            std::array::from_fn(|m| {
                let third = linalg::commutator(hs[l], inner[m]);
                linalg::commutator(hs[g], &third)
            })
        })
    });
    Ok(CommutatorSet {
        c12,
        c112,
        c212,
        fourth,
    })
}

/// Closed Pauli-string forms of the nested commutators on the open chain.
pub fn closed_form_commutators(model: &SpinModel) -> CommutatorSet<PauliSum> {
    use Pauli::{X, Y, Z};
    let n = model.n_spins;
    let (j, h) = (model.coupling, model.field);
    let last = n - 1;
    let c = |re: f64| Complex64::new(re, 0.0);
    let ci = |im: f64| Complex64::new(0.0, im);

    // [H₁,H₂] = 2iJh Σ (YZ + ZY)
    let mut c12 = PauliSum::zero(n);
    for s in 0..n - 1 {
        c12.add_term(ci(2.0 * j * h), &[(s, Y), (s + 1, Z)]);
        c12.add_term(ci(2.0 * j * h), &[(s, Z), (s + 1, Y)]);
    }

    // [H₁,[H₁,H₂]] = −8J²h [Σ X + Σ ZXZ] + 4J²h (X₀ + X_{N−1})
    let mut c112 = PauliSum::zero(n);
    for s in 0..n {
        c112.add_term(c(-8.0 * j * j * h), &[(s, X)]);
    }
    for s in 0..n.saturating_sub(2) {
        c112.add_term(c(-8.0 * j * j * h), &[(s, Z), (s + 1, X), (s + 2, Z)]);
    }
    c112.add_term(c(4.0 * j * j * h), &[(0, X)]);
    c112.add_term(c(4.0 * j * j * h), &[(last, X)]);

    // [H₂,[H₁,H₂]] = −8Jh² Σ (YY − ZZ)
    let mut c212 = PauliSum::zero(n);
    for s in 0..n - 1 {
        c212.add_term(c(-8.0 * j * h * h), &[(s, Y), (s + 1, Y)]);
        c212.add_term(c(8.0 * j * h * h), &[(s, Z), (s + 1, Z)]);
    }

    // [H₁,[H₁,[H₂,[H₁,H₂]]]] = [H₁,[H₂,[H₁,[H₁,H₂]]]]
    //   = −64J³h² [Σ YY − Σ ZXXZ] + 32J³h² (Y₀Y₁ + Y_{N−2}Y_{N−1})
    let mut m112 = PauliSum::zero(n);
    let k = 64.0 * j.powi(3) * h * h;
    for s in 0..n - 1 {
        m112.add_term(c(-k), &[(s, Y), (s + 1, Y)]);
    }
    for s in 0..n.saturating_sub(3) {
        m112.add_term(c(k), &[(s, Z), (s + 1, X), (s + 2, X), (s + 3, Z)]);
    }
    m112.add_term(c(k / 2.0), &[(0, Y), (1, Y)]);
    m112.add_term(c(k / 2.0), &[(last - 1, Y), (last, Y)]);

    // [H₂,[H₁,[H₂,[H₁,H₂]]]] = [H₂,[H₂,[H₁,[H₁,H₂]]]] = 64J²h³ Σ (YXY − ZXZ)
    let mut m212 = PauliSum::zero(n);
    let k = 64.0 * j * j * h.powi(3);
    for s in 0..n.saturating_sub(2) {
        m212.add_term(c(k), &[(s, Y), (s + 1, X), (s + 2, Y)]);
        m212.add_term(c(-k), &[(s, Z), (s + 1, X), (s + 2, Z)]);
    }

    // [H₁,[H₁,[H₁,H₂]]] = 16J²[H₁,H₂] − 24iJ³h (Y₀Z₁ + Z_{N−2}Y_{N−1}), hence
    // [H₁,·] = 16J²[H₁,[H₁,H₂]] + 48J⁴h (X₀ + X_{N−1})
    // [H₂,·] = 16J²[H₂,[H₁,H₂]] + 48J³h² (Y₀Y₁ − Z₀Z₁ + Y_{N−2}Y_{N−1} − Z_{N−2}Z_{N−1})
    let r1_1 = c112
        .scaled(c(16.0 * j * j))
        .plus(
            &PauliSum::zero(n)
                .with_term(c(48.0 * j.powi(4) * h), &[(0, X)])
                .with_term(c(48.0 * j.powi(4) * h), &[(last, X)]),
        );
    let k = 48.0 * j.powi(3) * h * h;
    let r2_1 = c212.scaled(c(16.0 * j * j)).plus(
        &PauliSum::zero(n)
            .with_term(c(k), &[(0, Y), (1, Y)])
            .with_term(c(-k), &[(0, Z), (1, Z)])
            .with_term(c(k), &[(last - 1, Y), (last, Y)])
            .with_term(c(-k), &[(last - 1, Z), (last, Z)]),
    );

    // [H_γ,[H₂,[H₂,[H₁,H₂]]]] = 16h² [H_γ,[H₁,H₂]]
    let r1_2 = c112.scaled(c(16.0 * h * h));
    let r2_2 = c212.scaled(c(16.0 * h * h));

    let fourth = [
        [[r1_1, m112.clone()], [m112, r1_2]],
        [[r2_1, m212.clone()], [m212, r2_2]],
    ];
    CommutatorSet {
        c12,
        c112,
        c212,
        fourth,
    }
}

/// Both constructions of the nested commutators and their largest relative
/// disagreement in spectral norm.
#[derive(Debug, Clone)]
pub struct ExplicitCommutators {
    pub by_multiplication: CommutatorSet<CMatrix>,
    pub by_closed_form: CommutatorSet<CMatrix>,
    pub max_relative_deviation: f64,
}

pub fn explicit_commutators(model: &SpinModel) -> Result<ExplicitCommutators> {
    let by_multiplication = commutators_by_multiplication(model)?;
    let by_closed_form = closed_form_commutators(model).map(PauliSum::to_matrix);
    let mut worst = 0.0_f64;
    for ((_, a), (_, b)) in by_multiplication
        .labelled()
        .into_iter()
        .zip(by_closed_form.labelled())
    {
        let diff = linalg::spectral_norm(&(a - b))?;
        let scale = linalg::spectral_norm(a)?;
        let rel = if scale > 0.0 { diff / scale } else { diff };
        worst = worst.max(rel);
    }
    Ok(ExplicitCommutators {
        by_multiplication,
        by_closed_form,
        max_relative_deviation: worst,
    })
}

/// Averaged single-flip excitation energy `Δ₀ = 2h[1 − (1 − 1/N) J/h]`.
pub fn perturbative_gap_guess(model: &SpinModel) -> f64 {
    let n = model.n_spins as f64;
    2.0 * model.field * (1.0 - (1.0 - 1.0 / n) * model.coupling / model.field)
}

/// Large-`N` limit of [`perturbative_gap_guess`]: `2(h − J)`.
pub fn perturbative_gap_limit(coupling: f64, field: f64) -> f64 {
    2.0 * (field - coupling)
}

/// Upper and lower bands `E_k^± = ±sqrt(J² + h² − 2Jh cos k)` of the
/// periodic chain (lattice constant 1).
pub fn dispersion(k: f64, coupling: f64, field: f64) -> (f64, f64) {
    let e = (coupling * coupling + field * field - 2.0 * coupling * field * k.cos())
        .max(0.0)
        .sqrt();
    (e, -e)
}

/// Thermodynamic-limit gap `E₀⁺ − E₀⁻ = 2|h − J|`.
pub fn exact_gap_thermodynamic(coupling: f64, field: f64) -> f64 {
    let (up, down) = dispersion(0.0, coupling, field);
    up - down
}
