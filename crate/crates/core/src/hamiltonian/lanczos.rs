//! Matrix-free Lanczos with full reorthogonalization and explicit restarts.
//!
//! Each cycle builds a Krylov basis of at most `krylov_dim` vectors from
//! `H|v>` products, diagonalizes the tridiagonal projection and restarts from
//! the lowest Ritz vector until its true residual `||Hx - θx||` falls below
//! `tol`. Previously converged eigenvectors are projected out of every new
//! basis vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::EigenPair;
use super::PauliSum;
use crate::error::{Error, Result};
use crate::statevector::{Complex, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosOptions {
    /// Basis size per restart cycle.
    pub krylov_dim: usize,
    /// Total `H|v>` products allowed per eigenpair.
    pub max_iterations: usize,
    /// Convergence threshold on `||Hx - θx||`.
    pub tol: f64,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 80,
            max_iterations: 500,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex], alpha: Complex, x: &[Complex]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn project_out(w: &mut [Complex], basis: &[&[Complex]]) {
    // Two passes of classical Gram-Schmidt keep the basis orthogonal to
    // machine precision.
    for _ in 0..2 {
        for q in basis {
            let overlap = dot(q, w);
            axpy(w, -overlap, q);
        }
    }
}

/// Projects `v` onto the flip sector `P v = s v`, `P = Π_i X_i`.
fn project_sector(v: &mut [Complex], s: f64) {
    let all = v.len() - 1;
    for b in 0..v.len() / 2 {
        let p = (v[b] + v[b ^ all] * s) * 0.5;
        v[b] = p;
        v[b ^ all] = p * s;
    }
}

/// Lowest eigenpair orthogonal to `locked`, restricted to a flip sector
/// when `sector` is given.
pub(super) fn lanczos_lowest(
    h: &PauliSum,
    locked: &[&StateVector],
    stream: u64,
    opts: &LanczosOptions,
    sector: Option<f64>,
) -> Result<EigenPair> {
    if opts.krylov_dim < 2 || opts.max_iterations == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(
            "Lanczos options out of range".into(),
        ));
    }
    let n = h.n_qubits();
    let dim = 1usize << n;
    let locked: Vec<&[Complex]> = locked.iter().map(|s| s.amplitudes()).collect();
    let space = if sector.is_some() { dim / 2 } else { dim };
    let m_max = opts.krylov_dim.min(space - locked.len()).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut start: Vec<Complex> = (0..dim)
        .map(|_| Complex::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();

    let mut steps = 0usize;
    let mut last_residual = f64::INFINITY;
    loop {
        if let Some(s) = sector {
            project_sector(&mut start, s);
        }
        project_out(&mut start, &locked);
        let nrm = norm(&start);
        if nrm == 0.0 {
            return Err(Error::InvalidArgument(
                "Lanczos start vector vanished after deflation".into(),
            ));
        }
        start.iter_mut().for_each(|x| *x /= nrm);

        let mut basis: Vec<Vec<Complex>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        while alpha.len() < m_max {
            let j = alpha.len();
            let qj = StateVector::from_amplitudes(basis[j].clone())?;
            let mut w = h.apply(&qj)?.into_amplitudes();
            steps += 1;
            if let Some(s) = sector {
                project_sector(&mut w, s);
            }
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            {
                let refs: Vec<&[Complex]> = locked
                    .iter()
                    .copied()
                    .chain(basis.iter().map(|v| v.as_slice()))
                    .collect();
                project_out(&mut w, &refs);
            }
            let b = norm(&w);
            if alpha.len() == m_max || b < 1e-13 {
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }

        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (low, _) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty tridiagonal");
        let y = eig.eigenvectors.column(low);
        let mut ritz = vec![Complex::new(0.0, 0.0); dim];
        for (coef, v) in y.iter().zip(&basis) {
            axpy(&mut ritz, Complex::new(*coef, 0.0), v);
        }
        project_out(&mut ritz, &locked);
        let rn = norm(&ritz);
        ritz.iter_mut().for_each(|x| *x /= rn);

        let state = StateVector::from_amplitudes(ritz)?;
        let hx = h.apply(&state)?;
        steps += 1;
        let value = state.inner(&hx)?.re;
        let residual = hx
            .amplitudes()
            .iter()
            .zip(state.amplitudes())
            .map(|(a, b)| (a - b * value).norm_sqr())
            .sum::<f64>()
            .sqrt();
        last_residual = last_residual.min(residual);
        if residual < opts.tol {
            return Ok(EigenPair { value, state });
        }
        if steps >= opts.max_iterations {
            return Err(Error::LanczosNotConverged {
                iterations: steps,
                residual: last_residual,
            });
        }
        start = state.into_amplitudes();
    }
}
