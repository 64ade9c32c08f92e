//! Exact diagonalization: dense for small registers, restarted Lanczos
//! beyond [`DENSE_MAX_QUBITS`].

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use super::lanczos::{lanczos_lowest, LanczosOptions};
use super::PauliSum;
use crate::error::{Error, Result};
use crate::statevector::{Complex, StateVector};

/// Registers up to this width are diagonalized densely.
pub const DENSE_MAX_QUBITS: usize = 10;

const MAX_EIGENPAIRS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub state: StateVector,
}

impl EigenPair {
    /// `||H v - λ v||`.
    pub fn residual(&self, h: &PauliSum) -> Result<f64> {
        let hv = h.apply(&self.state)?;
        Ok(hv
            .amplitudes()
            .iter()
            .zip(self.state.amplitudes())
            .map(|(a, b)| (a - b * self.value).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > MAX_EIGENPAIRS {
        return Err(Error::InvalidArgument(format!(
            "eigenpair count {k} outside 1..={MAX_EIGENPAIRS}"
        )));
    }
    Ok(())
}

/// The `k` lowest eigenpairs, values ascending. Dense up to
/// [`DENSE_MAX_QUBITS`], Lanczos above.
pub fn exact_eigenstates(h: &PauliSum, k: usize) -> Result<Vec<EigenPair>> {
    if h.n_qubits() <= DENSE_MAX_QUBITS {
        dense_eigenstates(h, k)
    } else {
        lanczos_eigenstates(h, k, &LanczosOptions::default())
    }
}

/// Global parity sectors, `+1` then `-1`.
const SECTORS: [f64; 2] = [1.0, -1.0];

/// All eigenpairs of the Hermitian `m`, unsorted.
fn eigh(m: DMatrix<Complex>, real: bool) -> Vec<(f64, Vec<Complex>)> {
    if real {
        let real = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        let eig = real.symmetric_eigen();
        eig.eigenvalues
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                let col = eig.eigenvectors.column(c);
                (v, col.iter().map(|&x| Complex::new(x, 0.0)).collect())
            })
            .collect()
    } else {
        let eig = m.symmetric_eigen();
        eig.eigenvalues
            .iter()
            .enumerate()
            .map(|(c, &v)| (v, eig.eigenvectors.column(c).iter().copied().collect()))
            .collect()
    }
}

/// The `k` lowest eigenpairs from a dense eigensolve. Parity-conserving
/// Hamiltonians are split into the two flip sectors, so near-degenerate
/// pairs come back as parity eigenstates rather than arbitrary mixtures.
pub fn dense_eigenstates(h: &PauliSum, k: usize) -> Result<Vec<EigenPair>> {
    check_k(k)?;
    let m = h.to_dense();
    let dim = m.nrows();
    let mut pairs = if h.conserves_parity() {
        // |b, s> = (|b> + s|b ^ all>) / √2 over b with the top bit clear.
        let (half, all) = (dim / 2, dim - 1);
        let mut out = Vec::with_capacity(dim);
        for s in SECTORS {
            let block = DMatrix::from_fn(half, half, |b, c| m[(b, c)] + m[(b, c ^ all)] * s);
            for (value, u) in eigh(block, h.is_real()) {
                let mut v = vec![Complex::new(0.0, 0.0); dim];
                for (b, ub) in u.iter().enumerate() {
                    v[b] = ub * FRAC_1_SQRT_2;
                    v[b ^ all] = ub * (s * FRAC_1_SQRT_2);
                }
                out.push((value, v));
            }
        }
        out
    } else {
        eigh(m, h.is_real())
    };
    // Stable, so exact cross-sector ties keep the even state first.
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
        .into_iter()
        .take(k)
        .map(|(value, v)| {
            let mut state = StateVector::from_amplitudes(v)?;
            state.normalize();
            Ok(EigenPair { value, state })
        })
        .collect()
}

/// Lowest `k` eigenpairs by restarted Lanczos with locking: each pair is
/// found in the orthogonal complement of the pairs before it. Parity
/// sectors are searched separately when the Hamiltonian conserves parity.
pub fn lanczos_eigenstates(
    h: &PauliSum,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Vec<EigenPair>> {
    check_k(k)?;
    let dim = 1usize << h.n_qubits();
    let sectors: Vec<Option<f64>> = if h.conserves_parity() {
        SECTORS.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let mut all: Vec<EigenPair> = Vec::new();
    for (si, &sector) in sectors.iter().enumerate() {
        let sector_dim = if sector.is_some() { dim / 2 } else { dim };
        let mut found: Vec<EigenPair> = Vec::with_capacity(k);
        for target in 0..k.min(sector_dim) {
            let locked: Vec<&StateVector> = found.iter().map(|p| &p.state).collect();
            let stream = (si * MAX_EIGENPAIRS + target) as u64;
            let pair = lanczos_lowest(h, &locked, stream, opts, sector)?;
            found.push(pair);
        }
        all.extend(found);
    }
    all.sort_by(|a, b| a.value.total_cmp(&b.value));
    all.truncate(k);
    Ok(all)
}
