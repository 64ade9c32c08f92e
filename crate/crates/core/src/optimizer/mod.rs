//! Deterministic local optimizers: L-BFGS with a strong-Wolfe line search and
//! unconstrained COBYLA.

mod cobyla;
mod lbfgs;

pub use cobyla::cobyla_minimize;
pub use lbfgs::{lbfgs_minimize, lbfgs_minimize_fg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sufficient-decrease constant of the Wolfe conditions.
pub const WOLFE_C1: f64 = 1e-4;
/// Curvature constant of the strong Wolfe conditions.
pub const WOLFE_C2: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptOptions {
    pub max_evals: usize,
    /// L-BFGS stops once `||grad||_inf` falls below this.
    pub grad_tol: f64,
    /// COBYLA starting trust radius.
    pub initial_trust_radius: f64,
    /// COBYLA stops when the trust radius reaches this and no step helps.
    pub final_trust_radius: f64,
    /// L-BFGS correction pairs kept.
    pub memory: usize,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            max_evals: 20_000,
            grad_tol: 1e-6,
            initial_trust_radius: 0.5,
            final_trust_radius: 1e-6,
            memory: 10,
        }
    }
}

impl OptOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive(self.grad_tol, "grad_tol")?;
        positive(self.initial_trust_radius, "initial_trust_radius")?;
        positive(self.final_trust_radius, "final_trust_radius")?;
        if self.final_trust_radius > self.initial_trust_radius {
            return Err(Error::InvalidArgument(
                "final_trust_radius exceeds initial_trust_radius".into(),
            ));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidArgument(
                "max_evals must be at least 1".into(),
            ));
        }
        if self.memory == 0 {
            return Err(Error::InvalidArgument("memory must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Tolerance,
    MaxEvals,
    TrustRadius,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub n_evals: usize,
    pub n_grad_evals: usize,
    pub n_iterations: usize,
    pub converged: bool,
    pub termination_reason: TerminationReason,
}

fn check_start(x0: &[f64]) -> Result<()> {
    if x0.is_empty() {
        return Err(Error::InvalidArgument("empty starting point".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("starting point"));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
