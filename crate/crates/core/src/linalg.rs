//! Dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Basis convention: site `j` of an `n`-spin register is bit `j` of the
//! computational-basis index, bit value 0 being the `σ^z = +1` state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

const EIGEN_MAX_ITERATIONS: usize = 100_000;

/// Matrix commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let states = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((energies, states))
}

/// Spectral norm (largest singular value), from the top eigenvalue of `a†a`.
pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let gram = a.adjoint() * a;
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or_else(|| Error::Numeric("eigensolver for a†a did not converge".into()))?;
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    Ok(top.max(0.0).sqrt())
}

/// Spectral norm of a Hermitian matrix: the largest eigenvalue magnitude.
pub fn hermitian_spectral_norm(a: &CMatrix) -> Result<f64> {
    let (energies, _) = hermitian_eigen(a)?;
    Ok(energies.iter().fold(0.0_f64, |acc, e| acc.max(e.abs())))
}

/// Integer matrix power by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut exponent: u64) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = &result * &base;
        }
        exponent >>= 1;
        if exponent > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Kronecker product where `a` acts on the higher-order bits.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `‖U†U − I‖` measured entrywise by the spectral norm.
pub fn unitarity_defect(u: &CMatrix) -> Result<f64> {
    let id = CMatrix::identity(u.nrows(), u.ncols());
    spectral_norm(&(u.adjoint() * u - id))
}

/// `‖a − b‖ / max(‖b‖, tiny)` in spectral norm.
pub fn relative_deviation(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let diff = spectral_norm(&(a - b))?;
    let scale = spectral_norm(b)?.max(f64::MIN_POSITIVE);
    Ok(diff / scale)
}

/// Distance `‖|a⟩⟨a| − |b⟩⟨b|‖` between two normalized pure states.
///
/// Evaluated as the norm of the component of `a` orthogonal to `b`, which
/// equals `sqrt(1 − |⟨a|b⟩|²)` without the cancellation of that form.
pub fn pure_state_distance(a: &CVector, b: &CVector) -> f64 {
    let overlap = b.dotc(a);
    let residual = a - b * overlap;
    residual.norm()
}

/// `|ψ⟩⟨ψ|` as a dense matrix.
pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}
