//! State diagnostics: magnetization, antipodal correlation, reduced density
//! matrices and von Neumann entropies.
//!
//! Entropies use the natural logarithm. The single-site average is also
//! reported in units of `ln 2`, where a maximally mixed qubit scores 1.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::lattice::LatticeSpec;
use crate::statevector::{Complex, PauliString, StateVector};

/// Largest subsystem for which a reduced density matrix is formed.
pub const MAX_SUBSYSTEM_QUBITS: usize = 12;

/// Tolerance of the Hermiticity, trace and positivity checks.
pub const DENSITY_TOL: f64 = 1e-10;

/// Eigenvalues at or below this contribute nothing to an entropy.
const EIGEN_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex>,
}

impl DensityMatrix {
    /// Validates a raw matrix: square with power-of-two size, Hermitian,
    /// unit trace and positive semidefinite, all within [`DENSITY_TOL`].
    pub fn new(entries: DMatrix<Complex>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: entries.ncols(),
            });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "density matrix size {dim} is not a power of two >= 2"
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("density matrix entry"));
        }
        check_hermitian(&entries)?;
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidArgument(format!("trace {trace} is not 1")));
        }
        let dm = Self { entries };
        let lowest = dm.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if lowest < -DENSITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {lowest}"
            )));
        }
        Ok(dm)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &DMatrix<Complex> {
        &self.entries
    }

    /// Eigenvalues, unordered.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn check_hermitian(m: &DMatrix<Complex>) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if worst > DENSITY_TOL {
        return Err(Error::NotHermitian(worst));
    }
    Ok(())
}

/// `M = (1/N) Σ_i <Z_i>`.
pub fn magnetization(s: &StateVector) -> f64 {
    let n = s.n_qubits() as f64;
    let weighted: f64 = s
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * (n - 2.0 * b.count_ones() as f64))
        .sum();
    weighted / n
}

/// Average `<Z_i Z_j>` over the lattice's antipodal pairs.
pub fn long_range_correlation(s: &StateVector, lat: &LatticeSpec) -> Result<f64> {
    if s.n_qubits() != lat.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: lat.n_sites(),
            actual: s.n_qubits(),
        });
    }
    let pairs = lat.antipodal_pairs()?;
    if pairs.is_empty() {
        return Err(Error::InvalidLattice("no antipodal pairs".into()));
    }
    let mut sum = 0.0;
    for &(a, b) in &pairs {
        sum += s.expectation(&PauliString::zz(a, b))?;
    }
    Ok(sum / pairs.len() as f64)
}

/// Sorted copy of a proper, nonempty, duplicate-free subset of `0..n`.
fn check_subset(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateQubit(w[0]));
    }
    if let Some(&q) = sorted.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange {
            index: q,
            n_qubits: n,
        });
    }
    if sorted.is_empty() || sorted.len() == n {
        return Err(Error::InvalidArgument(format!(
            "subsystem of size {} is not a proper nonempty part of {n} qubits",
            sorted.len()
        )));
    }
    if sorted.len() > MAX_SUBSYSTEM_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "subsystem of size {} exceeds {MAX_SUBSYSTEM_QUBITS}",
            sorted.len()
        )));
    }
    Ok(sorted)
}

/// Amplitudes as a `2^|A| x 2^|B|` matrix. Bit `k` of the row index is the
/// `k`-th smallest site of `A`; columns index the complement likewise.
fn bipartite_matrix(s: &StateVector, subset: &[usize]) -> DMatrix<Complex> {
    let n = s.n_qubits();
    let a_mask = subset.iter().fold(0usize, |m, &q| m | (1 << q));
    let rest: Vec<usize> = (0..n).filter(|q| a_mask & (1 << q) == 0).collect();
    let gather = |bits: usize, sites: &[usize]| {
        sites
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &q)| acc | (((bits >> q) & 1) << k))
    };
    let mut m = DMatrix::<Complex>::zeros(1 << subset.len(), 1 << rest.len());
    for (b, &amp) in s.amplitudes().iter().enumerate() {
        m[(gather(b, subset), gather(b, &rest))] = amp;
    }
    m
}

/// `rho_A = Tr_B |s><s|` for the sites in `subset`.
pub fn reduced_density_matrix(s: &StateVector, subset: &[usize]) -> Result<DensityMatrix> {
    let subset = check_subset(subset, s.n_qubits())?;
    let m = bipartite_matrix(s, &subset);
    let rho = &m * m.adjoint();
    DensityMatrix::new(rho)
}

fn entropy_of(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    probabilities
        .into_iter()
        .map(|p| p.clamp(0.0, 1.0))
        .filter(|&p| p > EIGEN_FLOOR)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `S = -Σ λ ln λ` over the eigenvalues of `dm`.
pub fn von_neumann_entropy(dm: &DensityMatrix) -> Result<f64> {
    check_hermitian(dm.entries())?;
    Ok(entropy_of(dm.eigenvalues()))
}

/// Entanglement entropy of `cut` from the Schmidt coefficients of `s`.
pub fn bipartite_entropy_svd(s: &StateVector, cut: &[usize]) -> Result<f64> {
    let cut = check_subset(cut, s.n_qubits())?;
    let m = bipartite_matrix(s, &cut);
    let sv = m.singular_values();
    Ok(entropy_of(sv.iter().map(|x| x * x)))
}

/// `(<X_q>, <Y_q>, <Z_q>)`.
pub fn bloch_vector(s: &StateVector, q: usize) -> Result<[f64; 3]> {
    Ok([
        s.expectation(&PauliString::x(q))?,
        s.expectation(&PauliString::y(q))?,
        s.expectation(&PauliString::z(q))?,
    ])
}

/// `rho_q = (I + <X>X + <Y>Y + <Z>Z) / 2`.
pub fn single_site_density_matrix(s: &StateVector, q: usize) -> Result<DensityMatrix> {
    let [x, y, z] = bloch_vector(s, q)?;
    let half = |re: f64, im: f64| Complex::new(re / 2.0, im / 2.0);
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            half(1.0 + z, 0.0),
            half(x, -y),
            half(x, y),
            half(1.0 - z, 0.0),
        ],
    );
    DensityMatrix::new(m)
}

/// Mean single-site entropy in nats and in units of `ln 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSiteEntropy {
    pub nats: f64,
    pub ln2_units: f64,
}

/// Mean over sites of the single-qubit entropy, from Bloch vectors.
pub fn single_site_entropy_avg(s: &StateVector) -> Result<SingleSiteEntropy> {
    let n = s.n_qubits();
    let mut total = 0.0;
    for q in 0..n {
        let [x, y, z] = bloch_vector(s, q)?;
        let r = (x * x + y * y + z * z).sqrt().min(1.0);
        total += entropy_of([(1.0 + r) / 2.0, (1.0 - r) / 2.0]);
    }
    let nats = total / n as f64;
    Ok(SingleSiteEntropy {
        nats,
        ln2_units: nats / LN_2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub energy: f64,
    /// `(<H^2> - <H>^2) / <H>^2`; `None` when `|<H>|` is too small to
    /// normalize by.
    pub variance: Option<f64>,
    pub magnetization: f64,
    /// `None` when some lattice extent is odd.
    pub long_range_corr: Option<f64>,
    pub single_site_entropy_avg: f64,
    pub single_site_entropy_avg_log2: f64,
    /// Entropy of the first `N/2` sites; zero for a single site.
    pub half_cut_entropy: f64,
    /// Set for `hx = 0`, where the ground space is degenerate and the
    /// state-dependent quantities are basis choices.
    pub degenerate_flag: bool,
}

/// Every diagnostic of `s` under `h` on `lat`.
pub fn observable_report(
    h: &PauliSum,
    lat: &LatticeSpec,
    hx: f64,
    s: &StateVector,
) -> Result<ObservableReport> {
    let n = s.n_qubits();
    if n != lat.n_sites() || n != h.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: lat.n_sites(),
            actual: n,
        });
    }
    let energy = h.energy(s)?;
    let variance = match h.energy_variance(s) {
        Ok(v) => Some(v),
        Err(Error::UndefinedNormalization(_)) => None,
        Err(e) => return Err(e),
    };
    let long_range_corr = match long_range_correlation(s, lat) {
        Ok(c) => Some(c),
        Err(Error::OddDimension) => None,
        Err(e) => return Err(e),
    };
    let single = single_site_entropy_avg(s)?;
    let half_cut_entropy = if n >= 2 {
        let cut: Vec<usize> = (0..n / 2).collect();
        bipartite_entropy_svd(s, &cut)?
    } else {
        0.0
    };
    Ok(ObservableReport {
        energy,
        variance,
        magnetization: magnetization(s),
        long_range_corr,
        single_site_entropy_avg: single.nats,
        single_site_entropy_avg_log2: single.ln2_units,
        half_cut_entropy,
        degenerate_flag: hx == 0.0,
    })
}
