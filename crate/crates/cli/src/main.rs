use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tfim_vqe::ansatz::Family;
use tfim_vqe::vqe::OptimizerKind;
use tfimvqe::{execute, load_with_overrides, write_outputs, Command, Overrides};

/// Thread count of the parallel restart and sweep pool.
const THREADS_VAR: &str = "TFIMVQE_THREADS";

#[derive(Parser)]
#[command(
    name = "tfimvqe",
    version,
    about = "VQE benchmarks for the transverse-field Ising model"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize one field point.
    Vqe(Flags),
    /// Optimize a grid of field values.
    Sweep(Flags),
    /// Exact diagonalization at one field value or a grid.
    Ed(Flags),
    /// Diagnostics of a given parameter vector.
    Observables(Flags),
    /// Fidelity histogram and frame potentials of an ansatz.
    Framepotential(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON config file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice extents, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    hx: Option<f64>,
    /// Field grid, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    hx_grid: Option<Vec<f64>>,
    /// HEA, HVA, HVA_SB or REAL_AMP.
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long)]
    layers: Option<usize>,
    /// LBFGS or COBYLA.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    warm_start: Option<bool>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind> {
    match s.to_ascii_uppercase().replace('-', "").as_str() {
        "LBFGS" => Ok(OptimizerKind::Lbfgs),
        "COBYLA" => Ok(OptimizerKind::Cobyla),
        _ => bail!("unknown optimizer {s:?}; expected LBFGS or COBYLA"),
    }
}

fn overrides(command: Command, f: &Flags) -> Result<Overrides> {
    Ok(Overrides {
        command: Some(command),
        dims: f.dims.clone(),
        hx: f.hx,
        hx_grid: f.hx_grid.clone(),
        ansatz: f.ansatz.as_deref().map(str::parse::<Family>).transpose()?,
        layers: f.layers,
        optimizer: f.optimizer.as_deref().map(parse_optimizer).transpose()?,
        restarts: f.restarts,
        seed: f.seed,
        warm_start: f.warm_start,
        out: f.out.clone(),
    })
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR}={value:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let (command, flags) = match &cli.command {
        Cmd::Vqe(f) => (Command::Vqe, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::Ed(f) => (Command::Ed, f),
        Cmd::Observables(f) => (Command::Observables, f),
        Cmd::Framepotential(f) => (Command::Framepotential, f),
    };
    let text = match &flags.config {
        Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let cfg = load_with_overrides(text.as_deref(), &overrides(command, flags)?)?;
    let artifacts = execute(&cfg)?;
    let dir = Path::new(&cfg.out);
    write_outputs(dir, &artifacts)?;
    for a in &artifacts {
        println!("{}", dir.join(&a.name).display());
    }
    Ok(())
}
