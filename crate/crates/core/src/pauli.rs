//! Sparse Pauli-string algebra for spin chains of up to 64 sites.
//!
//! A string is stored as two bit masks: site `j` carries `X` when only the
//! x bit is set, `Z` when only the z bit is set and `Y` when both are set.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::linalg::{CMatrix, I, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// Tensor product of single-site Pauli operators, without a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity() -> Self {
        Self { x: 0, z: 0 }
    }

    /// Builds a string from `(site, operator)` pairs; later pairs on the same
    /// site replace earlier ones.
    pub fn from_ops(ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity();
        for &(site, op) in ops {
            assert!(site < 64, "site index {site} out of range");
            let (x, z) = op.bits();
            let bit = 1u64 << site;
            s.x = (s.x & !bit) | if x { bit } else { 0 };
            s.z = (s.z & !bit) | if z { bit } else { 0 };
        }
        s
    }

    pub fn op(&self, site: usize) -> Pauli {
        let bit = 1u64 << site;
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    /// True when the two strings commute.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti.is_multiple_of(2)
    }

    /// Product `self · other = i^k · s`; returns `(k mod 4, s)`.
    pub fn product(&self, other: &Self) -> (u32, Self) {
        let mut k = 0u32;
        let active = self.x | self.z | other.x | other.z;
        let mut rest = active;
        while rest != 0 {
            let site = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            k += site_phase(self.op(site), other.op(site));
        }
        (
            k % 4,
            Self {
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        )
    }

    /// Applies the string to basis state `b`: returns `(phase, b')`.
    fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let ny = (self.x & self.z).count_ones();
        let sign_flips = (b as u64 & self.z).count_ones();
        let mut phase = I.powu(ny);
        if sign_flips % 2 == 1 {
            phase = -phase;
        }
        (phase, b ^ self.x as usize)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top = 64 - (self.x | self.z).leading_zeros() as usize;
        if top == 0 {
            return write!(f, "I");
        }
        for site in 0..top {
            let c = match self.op(site) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Power of `i` picked up by the single-site product `a · b`.
fn site_phase(a: Pauli, b: Pauli) -> u32 {
    use Pauli::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (Y, X) | (Z, Y) | (X, Z) => 3,
        _ => 0,
    }
}

/// Linear combination of Pauli strings on a fixed number of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_sites: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_sites: usize) -> Self {
        assert!(n_sites <= 64, "at most 64 sites are supported");
        Self {
            n_sites,
            terms: BTreeMap::new(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn add_term(&mut self, coefficient: Complex64, ops: &[(usize, Pauli)]) {
        debug_assert!(ops.iter().all(|&(s, _)| s < self.n_sites));
        self.add_string(coefficient, PauliString::from_ops(ops));
    }

    pub fn add_string(&mut self, coefficient: Complex64, string: PauliString) {
        let entry = self.terms.entry(string).or_insert(ZERO);
        *entry += coefficient;
    }

    /// Builder form of [`add_term`](Self::add_term).
    pub fn with_term(mut self, coefficient: Complex64, ops: &[(usize, Pauli)]) -> Self {
        self.add_term(coefficient, ops);
        self
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.n_sites, other.n_sites);
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_string(*c, *s);
        }
        out.pruned()
    }

    /// `[self, other]`, computed string by string.
    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.n_sites, other.n_sites);
        let mut out = Self::zero(self.n_sites);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a.commutes_with(b) {
                    continue;
                }
                // Anticommuting strings: [a, b] = 2ab.
                let (k, s) = a.product(b);
                out.add_string(ca * cb * I.powu(k) * 2.0, s);
            }
        }
        out.pruned()
    }

    /// Sum of coefficient magnitudes: a triangle-inequality norm bound.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn coefficient(&self, ops: &[(usize, Pauli)]) -> Complex64 {
        self.terms
            .get(&PauliString::from_ops(ops))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() > 1e-14);
        self
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_sites;
        let mut m = CMatrix::zeros(dim, dim);
        for (s, c) in &self.terms {
            for b in 0..dim {
                let (phase, row) = s.apply_to_basis(b);
                m[(row, b)] += c * phase;
            }
        }
        m
    }
}
