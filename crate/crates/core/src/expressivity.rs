//! Expressivity diagnostics: fidelities between independently sampled
//! circuit states, frame potentials and fidelity histograms.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzSpec, Circuit};
use crate::error::{Error, Result};

/// Slack allowed above 1 for a rounding-affected fidelity.
pub const FIDELITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySamples {
    /// `|<psi|phi>|^2` per sample, in sample order.
    pub values: Vec<f64>,
    /// `None` for samples drawn from a hand-built circuit.
    pub ansatz: Option<AnsatzSpec>,
    pub n_samples: usize,
    pub seed: u64,
}

impl FidelitySamples {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Standard error of the mean of `values^t`.
    pub fn standard_error(&self, t: u32) -> f64 {
        let n = self.values.len() as f64;
        let powered: Vec<f64> = self.values.iter().map(|v| v.powi(t as i32)).collect();
        let mean = powered.iter().sum::<f64>() / n;
        let var = powered.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

/// Draws `n_samples` pairs of parameter vectors uniformly from `[0, 2π)^P`
/// and records the overlap of the two prepared states.
pub fn sample_fidelities(
    spec: &AnsatzSpec,
    n_samples: usize,
    seed: u64,
) -> Result<FidelitySamples> {
    spec.validate()?;
    let circuit = build_ansatz(spec)?;
    let mut samples = sample_circuit_fidelities(&circuit, n_samples, seed)?;
    samples.ansatz = Some(spec.clone());
    Ok(samples)
}

/// As [`sample_fidelities`] for an explicit circuit. Sample `i` draws from
/// its own ChaCha stream, so the values do not depend on thread count.
pub fn sample_circuit_fidelities(
    circuit: &Circuit,
    n_samples: usize,
    seed: u64,
) -> Result<FidelitySamples> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    let p = circuit.n_params();
    let values = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let a: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..TAU)).collect();
            let b: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..TAU)).collect();
            let psi = circuit.prepare_state(&a)?;
            let phi = circuit.prepare_state(&b)?;
            Ok(psi.inner(&phi)?.norm_sqr().min(1.0 + FIDELITY_SLACK))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FidelitySamples {
        values,
        ansatz: None,
        n_samples,
        seed,
    })
}

/// `F_t = mean(values^t)`; the values are already squared overlaps.
pub fn frame_potential(samples: &FidelitySamples, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "frame potential order must be at least 1".into(),
        ));
    }
    if samples.values.is_empty() {
        return Err(Error::InvalidArgument("no fidelity samples".into()));
    }
    let sum: f64 = samples.values.iter().map(|v| v.powi(t as i32)).sum();
    Ok(sum / samples.values.len() as f64)
}

/// `F_t` of Haar-random states in dimension `d`: `t! (d-1)! / (d+t-1)!`.
pub fn haar_frame_potential(dim: usize, t: u32) -> f64 {
    (1..=t)
        .map(|k| k as f64 / (dim as f64 + k as f64 - 1.0))
        .product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `n_bins + 1` uniform edges over `[0, 1]`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Uniform bins over `[0, 1]`, half-open except the last, which also takes
/// the value 1 (and anything within rounding above it).
pub fn fidelity_histogram(samples: &FidelitySamples, n_bins: usize) -> Result<Histogram> {
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be at least 1".into()));
    }
    let bin_edges = (0..=n_bins).map(|k| k as f64 / n_bins as f64).collect();
    let mut counts = vec![0usize; n_bins];
    for &v in &samples.values {
        let k = ((v * n_bins as f64).floor().max(0.0) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { bin_edges, counts })
}
