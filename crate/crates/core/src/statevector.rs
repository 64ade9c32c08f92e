//! Dense state-vector kernel.
//!
//! Amplitudes live in one contiguous buffer in little-endian order: qubit `q`
//! is bit `q` of the basis index. Gate kernels walk the buffer in blocks of
//! `2^(q+1)` amplitudes and pair the lower and upper halves of each block;
//! above [`PARALLEL_MIN_QUBITS`] the blocks are processed on the rayon pool.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Largest register the toolkit will allocate (16 MiB of amplitudes).
pub const DEFAULT_QUBIT_CAP: usize = 20;

/// Registers at least this wide run their gate kernels in parallel.
pub const PARALLEL_MIN_QUBITS: usize = 14;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Tensor product of single-site Paulis, identity on all unlisted sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    factors: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(mut factors: Vec<(usize, Pauli)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "a Pauli string needs at least one factor".into(),
            ));
        }
        factors.sort_by_key(|&(site, _)| site);
        if let Some(w) = factors.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateQubit(w[0].0));
        }
        if let Some(&(site, _)) = factors.iter().find(|(site, _)| *site >= 64) {
            return Err(Error::QubitOutOfRange {
                index: site,
                n_qubits: 64,
            });
        }
        Ok(Self { factors })
    }

    pub fn single(site: usize, axis: Pauli) -> Self {
        Self {
            factors: vec![(site, axis)],
        }
    }

    pub fn x(site: usize) -> Self {
        Self::single(site, Pauli::X)
    }

    pub fn y(site: usize) -> Self {
        Self::single(site, Pauli::Y)
    }

    pub fn z(site: usize) -> Self {
        Self::single(site, Pauli::Z)
    }

    /// `Z_a Z_b`; panics if `a == b`.
    pub fn zz(a: usize, b: usize) -> Self {
        Self::new(vec![(a, Pauli::Z), (b, Pauli::Z)]).expect("distinct sites")
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn max_site(&self) -> usize {
        self.factors.last().map_or(0, |&(s, _)| s)
    }

    /// Bits flipped by the string (X and Y factors).
    pub fn flip_mask(&self) -> usize {
        self.factors
            .iter()
            .filter(|(_, p)| *p != Pauli::Z)
            .fold(0, |m, &(s, _)| m | 1 << s)
    }

    /// Bits contributing a `(-1)^bit` sign (Z and Y factors).
    pub fn sign_mask(&self) -> usize {
        self.factors
            .iter()
            .filter(|(_, p)| *p != Pauli::X)
            .fold(0, |m, &(s, _)| m | 1 << s)
    }

    /// `i^(number of Y factors)`, from `Y = i X Z`.
    pub fn global_phase(&self) -> Complex {
        match self.factors.iter().filter(|(_, p)| *p == Pauli::Y).count() % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    pub(crate) fn check(&self, n_qubits: usize) -> Result<()> {
        if self.max_site() >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: self.max_site(),
                n_qubits,
            });
        }
        Ok(())
    }

    pub fn is_diagonal(&self) -> bool {
        self.flip_mask() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    RZZ,
    CX,
    H,
    X,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::RZZ | GateKind::CX => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AngleSource {
    Fixed(f64),
    Param(usize),
}

/// A gate on one or two qubits. For `CX` the qubits are `[control, target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<AngleSource>,
}

impl Gate {
    fn rotation(kind: GateKind, qubits: Vec<usize>, angle: AngleSource) -> Self {
        Self {
            kind,
            qubits,
            angle: Some(angle),
        }
    }

    pub fn rx(q: usize, angle: AngleSource) -> Self {
        Self::rotation(GateKind::RX, vec![q], angle)
    }

    pub fn ry(q: usize, angle: AngleSource) -> Self {
        Self::rotation(GateKind::RY, vec![q], angle)
    }

    pub fn rz(q: usize, angle: AngleSource) -> Self {
        Self::rotation(GateKind::RZ, vec![q], angle)
    }

    pub fn rzz(a: usize, b: usize, angle: AngleSource) -> Self {
        Self::rotation(GateKind::RZZ, vec![a, b], angle)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::CX,
            qubits: vec![control, target],
            angle: None,
        }
    }

    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H,
            qubits: vec![q],
            angle: None,
        }
    }

    pub fn x(q: usize) -> Self {
        Self {
            kind: GateKind::X,
            qubits: vec![q],
            angle: None,
        }
    }

    pub fn param_slot(&self) -> Option<usize> {
        match self.angle {
            Some(AngleSource::Param(slot)) => Some(slot),
            _ => None,
        }
    }

    /// Pauli generator `A` of a rotation `exp(-i θ/2 A)`.
    pub fn generator(&self) -> Option<PauliString> {
        let q = &self.qubits;
        match self.kind {
            GateKind::RX => Some(PauliString::x(q[0])),
            GateKind::RY => Some(PauliString::y(q[0])),
            GateKind::RZ => Some(PauliString::z(q[0])),
            GateKind::RZZ => Some(PauliString::zz(q[0], q[1])),
            _ => None,
        }
    }

    pub(crate) fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{:?} acts on {} qubits, got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        for &q in &self.qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::DuplicateQubit(self.qubits[0]));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, bits: usize) -> Result<Self> {
        if n == 0 || n > DEFAULT_QUBIT_CAP {
            return Err(Error::QubitCount {
                n,
                cap: DEFAULT_QUBIT_CAP,
            });
        }
        let dim = 1usize << n;
        if bits >= dim {
            return Err(Error::BasisOutOfRange { bits, n_qubits: n });
        }
        let mut amps = vec![ZERO; dim];
        amps[bits] = ONE;
        Ok(Self { n_qubits: n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > DEFAULT_QUBIT_CAP {
            return Err(Error::QubitCount {
                n: n_qubits,
                cap: DEFAULT_QUBIT_CAP,
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
    }

    fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex> {
        self.check_same_dim(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `P|self>` as a new vector.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        p.check(self.n_qubits)?;
        let flip = p.flip_mask();
        let sign = p.sign_mask();
        let phase = p.global_phase();
        let mut out = vec![ZERO; self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            let s = if (b & sign).count_ones() % 2 == 1 {
                -phase
            } else {
                phase
            };
            out[b ^ flip] = s * a;
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `<bra|P|self>` without materializing `P|self>`.
    pub fn pauli_matrix_element(&self, bra: &StateVector, p: &PauliString) -> Result<Complex> {
        self.check_same_dim(bra)?;
        p.check(self.n_qubits)?;
        let flip = p.flip_mask();
        let sign = p.sign_mask();
        let sum: Complex = self
            .amps
            .iter()
            .enumerate()
            .map(|(b, &a)| {
                let term = bra.amps[b ^ flip].conj() * a;
                if (b & sign).count_ones() % 2 == 1 {
                    -term
                } else {
                    term
                }
            })
            .sum();
        Ok(p.global_phase() * sum)
    }

    /// `<self|P|self>`. Pauli strings are Hermitian, so the imaginary residue
    /// is rounding noise and is dropped.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let v = self.pauli_matrix_element(self, p)?;
        debug_assert!(
            v.im.abs() <= 1e-12 * self.norm_sqr().max(1.0),
            "non-real Pauli expectation {v}"
        );
        Ok(v.re)
    }

    /// Applies `g` in place. `angle` is ignored for non-rotation gates.
    pub fn apply_gate(&mut self, g: &Gate, angle: f64) -> Result<()> {
        g.validate(self.n_qubits)?;
        if g.kind.is_rotation() && !angle.is_finite() {
            return Err(Error::NonFinite("gate angle"));
        }
        let par = self.n_qubits >= PARALLEL_MIN_QUBITS;
        let amps = &mut self.amps[..];
        let q = g.qubits[0];
        match g.kind {
            GateKind::RX => {
                let (c, s) = half_angle(angle);
                let ms = Complex::new(0.0, -s);
                for_each_pair(amps, q, par, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = c * x + ms * y;
                    *b = ms * x + c * y;
                });
            }
            GateKind::RY => {
                let (c, s) = half_angle(angle);
                for_each_pair(amps, q, par, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                });
            }
            GateKind::RZ => {
                let (c, s) = half_angle(angle);
                let lo = Complex::new(c, -s);
                let hi = Complex::new(c, s);
                for_each_pair(amps, q, par, |_, a, b| {
                    *a *= lo;
                    *b *= hi;
                });
            }
            GateKind::RZZ => {
                let (c, s) = half_angle(angle);
                let even = Complex::new(c, -s);
                let odd = Complex::new(c, s);
                let mask = 1usize << q | 1usize << g.qubits[1];
                let f = move |i: usize, a: &mut Complex| {
                    *a *= if (i & mask).count_ones() == 1 {
                        odd
                    } else {
                        even
                    };
                };
                if par {
                    amps.par_iter_mut().enumerate().for_each(|(i, a)| f(i, a));
                } else {
                    amps.iter_mut().enumerate().for_each(|(i, a)| f(i, a));
                }
            }
            GateKind::CX => {
                let cmask = 1usize << q;
                for_each_pair(amps, g.qubits[1], par, |lo_index, a, b| {
                    if lo_index & cmask != 0 {
                        std::mem::swap(a, b);
                    }
                });
            }
            GateKind::H => {
                for_each_pair(amps, q, par, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * FRAC_1_SQRT_2;
                    *b = (x - y) * FRAC_1_SQRT_2;
                });
            }
            GateKind::X => {
                for_each_pair(amps, q, par, |_, a, b| std::mem::swap(a, b));
            }
        }
        Ok(())
    }

    /// Applies the inverse of `g` at `angle`.
    pub fn apply_gate_inverse(&mut self, g: &Gate, angle: f64) -> Result<()> {
        // H, X and CX are self-inverse; rotations invert by negating the angle.
        self.apply_gate(g, -angle)
    }
}

fn half_angle(theta: f64) -> (f64, f64) {
    let (s, c) = (0.5 * theta).sin_cos();
    (c, s)
}

/// Calls `f(index_of_lower, lower, upper)` for every amplitude pair that
/// differs only in bit `q`.
fn for_each_pair<F>(amps: &mut [Complex], q: usize, parallel: bool, f: F)
where
    F: Fn(usize, &mut Complex, &mut Complex) + Sync + Send,
{
    let stride = 1usize << q;
    let block = stride << 1;
    let run = |k: usize, chunk: &mut [Complex]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        let base = k * block;
        for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            f(base + j, a, b);
        }
    };
    if !parallel {
        amps.chunks_exact_mut(block)
            .enumerate()
            .for_each(|(k, c)| run(k, c));
    } else if amps.len() / block >= rayon::current_num_threads() {
        amps.par_chunks_exact_mut(block)
            .enumerate()
            .for_each(|(k, c)| run(k, c));
    } else {
        // Few large blocks: split inside each half instead.
        for (k, chunk) in amps.chunks_exact_mut(block).enumerate() {
            let (lo, hi) = chunk.split_at_mut(stride);
            let base = k * block;
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .enumerate()
                .for_each(|(j, (a, b))| f(base + j, a, b));
        }
    }
}
