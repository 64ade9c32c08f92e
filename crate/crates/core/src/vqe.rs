//! The variational driver: seeded multi-restart minimization of `<H>` over an
//! ansatz, and field sweeps with optional warm starts.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzSpec, Circuit, Family};
use crate::error::{Error, Result};
use crate::hamiltonian::{exact_eigenstates, PauliSum};
use crate::lattice::LatticeSpec;
use crate::observables::{observable_report, ObservableReport};
use crate::optimizer::{cobyla_minimize, lbfgs_minimize_fg, OptOptions, OptResult};

/// Reported energies may undercut the exact ground energy by this much.
pub const VARIATIONAL_SLACK: f64 = 1e-9;

/// Standard deviation of the `near_zero` initialization.
pub const NEAR_ZERO_SIGMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "LBFGS")]
    Lbfgs,
    #[serde(rename = "COBYLA")]
    Cobyla,
}

impl OptimizerKind {
    /// Gradient-based for the hardware-efficient families, derivative-free
    /// for the Hamiltonian-variational ones.
    pub fn default_for(family: Family) -> Self {
        if family.is_hamiltonian_variational() {
            OptimizerKind::Cobyla
        } else {
            OptimizerKind::Lbfgs
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Every angle uniform in `[-π, π)`.
    UniformRandom,
    /// Every angle drawn from `Normal(0, 0.1)`.
    NearZero,
    /// Start from supplied parameters; without them this falls back to the
    /// family default.
    WarmStart,
}

impl InitMode {
    pub fn default_for(family: Family) -> Self {
        if family.is_hamiltonian_variational() {
            InitMode::NearZero
        } else {
            InitMode::UniformRandom
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    /// Circuit family, depth and lattice; the Hamiltonian lives on the same
    /// lattice.
    pub ansatz: AnsatzSpec,
    pub jz: f64,
    pub optimizer: OptimizerKind,
    pub opt: OptOptions,
    pub restarts: usize,
    pub init_mode: InitMode,
    pub seed: u64,
    /// Random restarts run next to the warm-started one in a warm sweep.
    pub warm_fresh_restarts: usize,
    /// Attach an exact ground energy when the register is small enough.
    pub exact: bool,
    pub exact_max_qubits: usize,
}

impl VqeConfig {
    /// Defaults: `jz = -1`, family-matched optimizer and initialization,
    /// 5 restarts, seed 0, one fresh restart beside each warm start, exact
    /// reference up to 16 qubits.
    pub fn new(ansatz: AnsatzSpec) -> Self {
        let family = ansatz.family;
        Self {
            ansatz,
            jz: -1.0,
            optimizer: OptimizerKind::default_for(family),
            opt: OptOptions::default(),
            restarts: 5,
            init_mode: InitMode::default_for(family),
            seed: 0,
            warm_fresh_restarts: 1,
            exact: true,
            exact_max_qubits: 16,
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.ansatz.lattice
    }

    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        self.opt.validate()?;
        if !self.jz.is_finite() {
            return Err(Error::NonFinite("jz"));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        Ok(())
    }

    fn random_mode(&self) -> InitMode {
        match self.init_mode {
            InitMode::WarmStart => InitMode::default_for(self.ansatz.family),
            m => m,
        }
    }
}

/// Per-restart record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub index: usize,
    pub warm: bool,
    /// `None` when the restart failed; see `error`.
    pub opt: Option<OptResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub hx: f64,
    pub energy: f64,
    pub params: Vec<f64>,
    pub exact_energy: Option<f64>,
    /// `|E - E_exact| / |E_exact|`.
    pub relative_error: Option<f64>,
    pub observables: ObservableReport,
    /// Optimizer record of the best restart.
    pub opt: OptResult,
    pub restart_index_of_best: usize,
    pub restarts: Vec<RestartOutcome>,
    /// Objective evaluations summed over all restarts.
    pub n_evals: usize,
}

/// A grid point that produced no result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub hx: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: VqeConfig,
    pub hx_grid: Vec<f64>,
    pub warm_start: bool,
    /// Successful points, ordered by `hx`.
    pub points: Vec<VqeResult>,
    pub failures: Vec<PointFailure>,
    /// Not serialized, so repeated runs produce identical output.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl SweepReport {
    pub fn total_evals(&self) -> usize {
        self.points.iter().map(|p| p.n_evals).sum()
    }
}

/// Exact ground energies keyed by lattice, `jz` and `hx`.
#[derive(Debug, Default)]
pub struct ExactCache {
    energies: Mutex<HashMap<(LatticeSpec, u64, u64), f64>>,
}

impl ExactCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ground_energy(&self, lat: &LatticeSpec, jz: f64, hx: f64) -> Result<f64> {
        let key = (lat.clone(), jz.to_bits(), hx.to_bits());
        if let Some(&e) = self.energies.lock().expect("cache lock").get(&key) {
            return Ok(e);
        }
        let h = PauliSum::tfim(lat, jz, hx)?;
        let e = exact_eigenstates(&h, 1)?[0].value;
        self.energies.lock().expect("cache lock").insert(key, e);
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.energies.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Seed of restart `restart` at grid point `point`: ChaCha stream
/// `(point << 32) | restart` of the run seed.
fn restart_rng(seed: u64, point: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | restart as u64);
    rng
}

fn random_start(mode: InitMode, p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match mode {
        InitMode::NearZero => {
            let normal = Normal::new(0.0, NEAR_ZERO_SIGMA).expect("positive sigma");
            (0..p).map(|_| rng.sample(normal)).collect()
        }
        _ => (0..p).map(|_| rng.random_range(-PI..PI)).collect(),
    }
}

/// Starting points of one grid point: the warm start (if any) first, then
/// seeded random draws.
fn starting_points(
    cfg: &VqeConfig,
    point: usize,
    init: Option<&[f64]>,
) -> Result<Vec<(Vec<f64>, bool)>> {
    let p = cfg.ansatz.n_params();
    let mut starts = Vec::new();
    let fresh = match init {
        Some(x) => {
            if x.len() != p {
                return Err(Error::ParameterLength {
                    expected: p,
                    actual: x.len(),
                });
            }
            starts.push((x.to_vec(), true));
            cfg.warm_fresh_restarts
        }
        None => cfg.restarts,
    };
    let mode = cfg.random_mode();
    for r in starts.len()..starts.len() + fresh {
        let mut rng = restart_rng(cfg.seed, point, r);
        starts.push((random_start(mode, p, &mut rng), false));
    }
    Ok(starts)
}

fn optimize(cfg: &VqeConfig, circuit: &Circuit, h: &PauliSum, x0: &[f64]) -> Result<OptResult> {
    match cfg.optimizer {
        OptimizerKind::Lbfgs => lbfgs_minimize_fg(
            |x| {
                circuit
                    .energy_and_gradient(x, h)
                    .expect("parameter length fixed by the circuit")
            },
            x0,
            &cfg.opt,
        ),
        OptimizerKind::Cobyla => cobyla_minimize(
            |x| {
                circuit
                    .energy(x, h)
                    .expect("parameter length fixed by the circuit")
            },
            x0,
            &cfg.opt,
        ),
    }
}

/// One VQE point at field `hx`. With `init`, one restart starts there and
/// `warm_fresh_restarts` random ones run beside it; otherwise `restarts`
/// random starts are drawn according to `init_mode`.
pub fn run_vqe(cfg: &VqeConfig, hx: f64, init: Option<&[f64]>) -> Result<VqeResult> {
    run_vqe_point(cfg, hx, init, 0, &ExactCache::new())
}

/// [`run_vqe`] for grid point `point`, sharing an exact-energy cache.
pub fn run_vqe_point(
    cfg: &VqeConfig,
    hx: f64,
    init: Option<&[f64]>,
    point: usize,
    cache: &ExactCache,
) -> Result<VqeResult> {
    cfg.validate()?;
    let starts = starting_points(cfg, point, init)?;
    run_from_starts(cfg, hx, starts, cache)
}

/// Runs one restart per starting point (in parallel) and keeps the lowest
/// energy; ties go to the lowest restart index.
pub fn run_vqe_from_starts(cfg: &VqeConfig, hx: f64, starts: Vec<Vec<f64>>) -> Result<VqeResult> {
    cfg.validate()?;
    let starts = starts.into_iter().map(|x| (x, false)).collect();
    run_from_starts(cfg, hx, starts, &ExactCache::new())
}

fn run_from_starts(
    cfg: &VqeConfig,
    hx: f64,
    starts: Vec<(Vec<f64>, bool)>,
    cache: &ExactCache,
) -> Result<VqeResult> {
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no starting points".into()));
    }
    let lat = cfg.lattice();
    let h = PauliSum::tfim(lat, cfg.jz, hx)?;
    let circuit = build_ansatz(&cfg.ansatz)?;
    let p = circuit.n_params();
    if let Some((x, _)) = starts.iter().find(|(x, _)| x.len() != p) {
        return Err(Error::ParameterLength {
            expected: p,
            actual: x.len(),
        });
    }

    let restarts: Vec<RestartOutcome> = starts
        .par_iter()
        .enumerate()
        .map(
            |(index, (x0, warm))| match optimize(cfg, &circuit, &h, x0) {
                Ok(opt) => RestartOutcome {
                    index,
                    warm: *warm,
                    opt: Some(opt),
                    error: None,
                },
                Err(e) => RestartOutcome {
                    index,
                    warm: *warm,
                    opt: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();

    let mut best: Option<(usize, &OptResult)> = None;
    for r in &restarts {
        if let Some(opt) = &r.opt {
            if best.is_none_or(|(_, b)| opt.f_best < b.f_best) {
                best = Some((r.index, opt));
            }
        }
    }
    let Some((best_index, best_opt)) = best else {
        return Err(Error::AllRestartsFailed(restarts.len()));
    };
    let best_opt = best_opt.clone();
    let n_evals = restarts
        .iter()
        .filter_map(|r| r.opt.as_ref())
        .map(|o| o.n_evals)
        .sum();

    let state = circuit.prepare_state(&best_opt.x_best)?;
    let observables = observable_report(&h, lat, hx, &state)?;
    let energy = best_opt.f_best;

    let exact_energy = if cfg.exact && lat.n_sites() <= cfg.exact_max_qubits {
        Some(cache.ground_energy(lat, cfg.jz, hx)?)
    } else {
        None
    };
    if let Some(exact) = exact_energy {
        if energy < exact - VARIATIONAL_SLACK {
            return Err(Error::VariationalBound { energy, exact });
        }
    }
    let relative_error = exact_energy
        .filter(|e| *e != 0.0)
        .map(|e| (energy - e).abs() / e.abs());

    Ok(VqeResult {
        hx,
        energy,
        params: best_opt.x_best.clone(),
        exact_energy,
        relative_error,
        observables,
        opt: best_opt,
        restart_index_of_best: best_index,
        restarts,
        n_evals,
    })
}

/// VQE over a strictly increasing field grid.
///
/// Cold sweeps run the points in parallel. Warm sweeps run them in order and
/// seed each point after the first with the previous point's optimum; a
/// point that fails is recorded and the next one starts cold.
pub fn sweep_field(cfg: &VqeConfig, hx_grid: &[f64], warm_start: bool) -> Result<SweepReport> {
    sweep_field_cached(cfg, hx_grid, warm_start, &ExactCache::new())
}

pub fn sweep_field_cached(
    cfg: &VqeConfig,
    hx_grid: &[f64],
    warm_start: bool,
    cache: &ExactCache,
) -> Result<SweepReport> {
    cfg.validate()?;
    if hx_grid.is_empty() {
        return Err(Error::InvalidArgument("empty field grid".into()));
    }
    if hx_grid.iter().any(|h| !h.is_finite()) {
        return Err(Error::NonFinite("hx grid"));
    }
    if hx_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "hx grid must be strictly increasing".into(),
        ));
    }
    let clock = Instant::now();
    let outcomes: Vec<Result<VqeResult>> = if warm_start {
        let mut out = Vec::with_capacity(hx_grid.len());
        let mut prev: Option<Vec<f64>> = None;
        for (i, &hx) in hx_grid.iter().enumerate() {
            let r = run_vqe_point(cfg, hx, prev.as_deref(), i, cache);
            prev = r.as_ref().ok().map(|v| v.params.clone());
            out.push(r);
        }
        out
    } else {
        hx_grid
            .par_iter()
            .enumerate()
            .map(|(i, &hx)| run_vqe_point(cfg, hx, None, i, cache))
            .collect()
    };
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (r, &hx) in outcomes.into_iter().zip(hx_grid) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push(PointFailure {
                hx,
                error: e.to_string(),
            }),
        }
    }
    Ok(SweepReport {
        config: cfg.clone(),
        hx_grid: hx_grid.to_vec(),
        warm_start,
        points,
        failures,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}
