//! Hybrid quantum gap estimation from filtered time series.
//!
//! The crate simulates Trotterized time evolution of the open transverse-field
//! Ising chain on a dense statevector, turns the measured return probability
//! `P(t) = |<ψ|U(t)|ψ>|²` into a filtered spectral function, and extracts the
//! lowest excitation gap with a windowed peak search. Exact diagonalization of
//! the chain serves as the reference for every step.
//!
//! Module map:
//!
//! * [`model`]: the Ising chain, exact diagonalization, commutator bounds and
//!   reference gap formulas.
//! * [`trotter`]: product-formula propagators, filters, the filtered
//!   truncation-error bound and circuit-depth cutoffs.
//! * [`simulator`]: input-state preparation, gate sequences and time series
//!   with optional shot noise.
//! * [`spectral`]: the discrete spectral function and its exact
//!   eigen-decomposition counterpart.
//! * [`gapfinder`]: peak search, error measures and orientation sweeps.
//! * [`scaling`]: finite-size extrapolation and the paramagnetic phase diagram.
//! * [`toymodel`]: two-peak line-shape model for peak-center shifts.
//!
//! Energies are measured in units of the transverse field `h` throughout the
//! command-line front end; the library itself accepts arbitrary `h > 0`.

pub mod error;
pub mod gapfinder;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pauli;
pub mod scaling;
pub mod simulator;
pub mod spectral;
pub mod toymodel;
pub mod trotter;

pub use error::{Error, Result};
