//! Pauli-sum Hamiltonians: the transverse-field Ising builder, energies,
//! normalized energy variance and the exact-diagonalization oracle.

mod exact;
mod lanczos;

pub use exact::{
    dense_eigenstates, exact_eigenstates, lanczos_eigenstates, EigenPair, DENSE_MAX_QUBITS,
};
pub use lanczos::LanczosOptions;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::statevector::{Complex, Pauli, PauliString, StateVector, PARALLEL_MIN_QUBITS};

/// `|<H>|` below this makes the normalized variance undefined.
pub const VARIANCE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

/// Terms sharing one flip mask, applied together.
#[derive(Debug, Clone)]
struct FlipGroup {
    flip: usize,
    parts: Vec<(Complex, usize)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (c, p) in &terms {
            if !c.is_finite() {
                return Err(Error::NonFinite("Pauli coefficient"));
            }
            p.check(n_qubits)?;
        }
        Ok(Self { n_qubits, terms })
    }

    /// `H = jz Σ_<ij> Z_i Z_j + hx Σ_i X_i`, bonds first (in lattice edge
    /// order), then sites.
    pub fn tfim(lat: &LatticeSpec, jz: f64, hx: f64) -> Result<Self> {
        if !jz.is_finite() {
            return Err(Error::NonFinite("jz"));
        }
        if !hx.is_finite() {
            return Err(Error::NonFinite("hx"));
        }
        let mut terms: Vec<(f64, PauliString)> = lat
            .edges()
            .into_iter()
            .map(|(a, b)| (jz, PauliString::zz(a, b)))
            .collect();
        terms.extend((0..lat.n_sites()).map(|i| (hx, PauliString::x(i))));
        Self::new(lat.n_sites(), terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// True when every matrix element in the computational basis is real.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.global_phase().im == 0.0)
    }

    /// True when every term commutes with the global flip `Π_i X_i`, so
    /// eigenstates can be taken with definite parity.
    pub fn conserves_parity(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, p)| p.factors().iter().filter(|(_, a)| *a != Pauli::X).count() % 2 == 0)
    }

    fn check_state(&self, s: &StateVector) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: s.n_qubits(),
            });
        }
        Ok(())
    }

    fn flip_groups(&self) -> Vec<FlipGroup> {
        let mut groups: Vec<FlipGroup> = Vec::new();
        for (c, p) in &self.terms {
            let part = (p.global_phase() * *c, p.sign_mask());
            match groups.iter_mut().find(|g| g.flip == p.flip_mask()) {
                Some(g) => g.parts.push(part),
                None => groups.push(FlipGroup {
                    flip: p.flip_mask(),
                    parts: vec![part],
                }),
            }
        }
        groups
    }

    /// `H|s>`; the result is not normalized.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.check_state(s)?;
        let groups = self.flip_groups();
        let psi = s.amplitudes();
        let mut out = vec![Complex::new(0.0, 0.0); psi.len()];
        // Gather form: out[b] = Σ_k c_k sign_k(b ^ f_k) psi[b ^ f_k], one
        // independent sum per output amplitude.
        let row = |b: usize| -> Complex {
            let mut acc = Complex::new(0.0, 0.0);
            for g in &groups {
                let src = b ^ g.flip;
                let mut coef = Complex::new(0.0, 0.0);
                for &(c, sign) in &g.parts {
                    if (src & sign).count_ones() % 2 == 1 {
                        coef -= c;
                    } else {
                        coef += c;
                    }
                }
                acc += coef * psi[src];
            }
            acc
        };
        if self.n_qubits >= PARALLEL_MIN_QUBITS {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(b, o)| *o = row(b));
        } else {
            out.iter_mut().enumerate().for_each(|(b, o)| *o = row(b));
        }
        StateVector::from_amplitudes(out)
    }

    /// `<s|H|s> = Σ_k c_k <P_k>`.
    pub fn energy(&self, s: &StateVector) -> Result<f64> {
        self.check_state(s)?;
        self.terms
            .iter()
            .try_fold(0.0, |acc, (c, p)| Ok(acc + c * s.expectation(p)?))
    }

    /// `<H^2>` as `||H|s>||^2`.
    pub fn second_moment(&self, s: &StateVector) -> Result<f64> {
        Ok(self.apply(s)?.norm_sqr())
    }

    /// `(<H^2> - <H>^2) / <H>^2`, clamped at zero.
    pub fn energy_variance(&self, s: &StateVector) -> Result<f64> {
        let e = self.energy(s)?;
        if e.abs() <= VARIANCE_GUARD {
            return Err(Error::UndefinedNormalization(e.abs()));
        }
        let h2 = self.second_moment(s)?;
        Ok(((h2 - e * e) / (e * e)).max(0.0))
    }

    /// Full `2^n x 2^n` matrix in the computational basis.
    pub fn to_dense(&self) -> DMatrix<Complex> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex>::zeros(dim, dim);
        for (c, p) in &self.terms {
            let flip = p.flip_mask();
            let sign = p.sign_mask();
            let coef = p.global_phase() * *c;
            for col in 0..dim {
                let v = if (col & sign).count_ones() % 2 == 1 {
                    -coef
                } else {
                    coef
                };
                m[(col ^ flip, col)] += v;
            }
        }
        m
    }
}
