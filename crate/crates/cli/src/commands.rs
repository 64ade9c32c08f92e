//! Command execution. Each command returns its output files in memory so
//! that callers decide where (and whether) to write them.

use anyhow::{Context, Result};
use serde::Serialize;

use tfim_vqe::ansatz::build_ansatz;
use tfim_vqe::expressivity::{
    fidelity_histogram, frame_potential, haar_frame_potential, sample_fidelities, Histogram,
};
use tfim_vqe::hamiltonian::{exact_eigenstates, PauliSum};
use tfim_vqe::observables::{observable_report, ObservableReport};
use tfim_vqe::vqe::{run_vqe, sweep_field, SweepReport, VqeResult};

use crate::config::{Command, RunConfig};
use crate::output::{fmt_num, histogram_to_csv, rows_to_csv, Row};
use crate::plot::{LinePlot, Series};

pub const TOOL_NAME: &str = "tfimvqe";

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

#[derive(Serialize)]
struct Versions {
    tfimvqe: &'static str,
    tfim_vqe: &'static str,
}

/// JSON run record: everything needed to rerun the command, plus results.
#[derive(Serialize)]
struct RunRecord<'a, T: Serialize> {
    tool: &'static str,
    versions: Versions,
    command: Command,
    seed: u64,
    config: &'a RunConfig,
    result: T,
}

fn record<T: Serialize>(cfg: &RunConfig, result: T) -> Result<Artifact> {
    let rec = RunRecord {
        tool: TOOL_NAME,
        versions: Versions {
            tfimvqe: env!("CARGO_PKG_VERSION"),
            tfim_vqe: tfim_vqe::VERSION,
        },
        command: cfg.command,
        seed: cfg.seed,
        config: cfg,
        result,
    };
    let mut text = serde_json::to_string_pretty(&rec).context("serializing run record")?;
    text.push('\n');
    Ok(Artifact::new(format!("{}.json", cfg.command), text))
}

pub fn execute(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    match cfg.command {
        Command::Vqe => vqe(cfg),
        Command::Sweep => sweep(cfg),
        Command::Ed => ed(cfg),
        Command::Observables => observables(cfg),
        Command::Framepotential => framepotential(cfg),
    }
}

fn csv(cfg: &RunConfig, rows: &[Row]) -> Artifact {
    Artifact::new(format!("{}.csv", cfg.command), rows_to_csv(rows))
}

fn vqe(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let hx = cfg.hx.expect("resolved config");
    let result: VqeResult = run_vqe(&cfg.vqe_config()?, hx, None)?;
    Ok(vec![
        csv(cfg, &[Row::from_vqe(&result)]),
        record(cfg, &result)?,
    ])
}

fn sweep(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.hx_grid.as_ref().expect("resolved config");
    let warm = cfg.warm_start.expect("resolved config");
    let report: SweepReport = sweep_field(&cfg.vqe_config()?, grid, warm)?;
    let rows: Vec<Row> = report.points.iter().map(Row::from_vqe).collect();
    let mut out = vec![csv(cfg, &rows), record(cfg, &report)?];
    if cfg.plots && !rows.is_empty() {
        out.extend(sweep_plots(cfg, &rows));
    }
    Ok(out)
}

fn series(label: &str, rows: &[Row], f: impl Fn(&Row) -> Option<f64>) -> Series {
    Series {
        label: label.into(),
        points: rows
            .iter()
            .filter_map(|r| f(r).map(|y| (r.hx, y)))
            .collect(),
    }
}

fn sweep_plots(cfg: &RunConfig, rows: &[Row]) -> Vec<Artifact> {
    let prefix = cfg.command.name();
    let plot = |name: &str, title: &str, y_label: &str, series: Vec<Series>| {
        let p = LinePlot {
            title: title.into(),
            x_label: "hx".into(),
            y_label: y_label.into(),
            series,
        };
        Artifact::new(format!("{prefix}_{name}.svg"), p.to_svg())
    };
    vec![
        plot(
            "energy",
            "Ground-state energy",
            "energy",
            vec![
                series("computed", rows, |r| Some(r.energy)),
                series("exact", rows, |r| r.exact_energy),
            ],
        ),
        plot(
            "variance",
            "Normalized energy variance",
            "Var(E)",
            vec![series("variance", rows, |r| r.variance)],
        ),
        plot(
            "order",
            "Magnetization and antipodal correlation",
            "value",
            vec![
                series("magnetization", rows, |r| Some(r.magnetization)),
                series("M_corr", rows, |r| r.long_range_corr),
            ],
        ),
        plot(
            "entropy",
            "Entanglement entropy",
            "entropy",
            vec![
                series("single site (ln 2 units)", rows, |r| {
                    Some(r.ee_single_site_ln2)
                }),
                series("half cut (nats)", rows, |r| Some(r.ee_half_cut)),
            ],
        ),
    ]
}

#[derive(Serialize)]
struct ExactPoint {
    hx: f64,
    eigenvalues: Vec<f64>,
    observables: ObservableReport,
}

fn ed(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let lat = cfg.lattice()?;
    let grid = match (&cfg.hx_grid, cfg.hx) {
        (Some(g), _) => g.clone(),
        (None, Some(h)) => vec![h],
        (None, None) => unreachable!("resolved config has a field"),
    };
    let k = cfg.n_eigenvalues.expect("resolved config");
    let mut points = Vec::with_capacity(grid.len());
    let mut rows = Vec::with_capacity(grid.len());
    for &hx in &grid {
        let h = PauliSum::tfim(&lat, cfg.jz, hx)?;
        let pairs =
            exact_eigenstates(&h, k).with_context(|| format!("diagonalizing at hx={hx}"))?;
        let obs = observable_report(&h, &lat, hx, &pairs[0].state)?;
        let mut row = Row::from_observables(hx, &obs);
        row.exact_energy = Some(pairs[0].value);
        row.relative_error = Some(0.0);
        rows.push(row);
        points.push(ExactPoint {
            hx,
            eigenvalues: pairs.iter().map(|p| p.value).collect(),
            observables: obs,
        });
    }
    let mut out = vec![csv(cfg, &rows), record(cfg, &points)?];
    if cfg.plots && rows.len() > 1 {
        out.extend(sweep_plots(cfg, &rows));
    }
    Ok(out)
}

#[derive(Serialize)]
struct StateReport {
    hx: f64,
    params: Vec<f64>,
    exact_energy: Option<f64>,
    relative_error: Option<f64>,
    observables: ObservableReport,
}

fn observables(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let hx = cfg.hx.expect("resolved config");
    let params = cfg.params.clone().expect("resolved config");
    let lat = cfg.lattice()?;
    let circuit = build_ansatz(&cfg.ansatz_spec(lat.clone())?)?;
    let state = circuit.prepare_state(&params)?;
    let h = PauliSum::tfim(&lat, cfg.jz, hx)?;
    let obs = observable_report(&h, &lat, hx, &state)?;
    let within_cap = lat.n_sites() <= cfg.exact_max_qubits.expect("resolved config");
    let exact_energy = if cfg.exact == Some(true) && within_cap {
        Some(exact_eigenstates(&h, 1)?[0].value)
    } else {
        None
    };
    let relative_error = exact_energy
        .filter(|e| *e != 0.0)
        .map(|e| (obs.energy - e).abs() / e.abs());
    let mut row = Row::from_observables(hx, &obs);
    row.exact_energy = exact_energy;
    row.relative_error = relative_error;
    let report = StateReport {
        hx,
        params,
        exact_energy,
        relative_error,
        observables: obs,
    };
    Ok(vec![csv(cfg, &[row]), record(cfg, &report)?])
}

#[derive(Serialize)]
struct FrameReport {
    n_samples: usize,
    n_bins: usize,
    mean_fidelity: f64,
    standard_error: f64,
    frame_potential_t1: f64,
    frame_potential_t2: f64,
    haar_t1: f64,
    haar_t2: f64,
    histogram: Histogram,
}

fn framepotential(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let spec = cfg.ansatz_spec(cfg.lattice()?)?;
    let n = cfg.n_samples.expect("resolved config");
    let bins = cfg.n_bins.expect("resolved config");
    let samples = sample_fidelities(&spec, n, cfg.seed)?;
    let histogram = fidelity_histogram(&samples, bins)?;
    let dim = 1usize << spec.n_qubits();
    let report = FrameReport {
        n_samples: n,
        n_bins: bins,
        mean_fidelity: samples.mean(),
        standard_error: samples.standard_error(1),
        frame_potential_t1: frame_potential(&samples, 1)?,
        frame_potential_t2: frame_potential(&samples, 2)?,
        haar_t1: haar_frame_potential(dim, 1),
        haar_t2: haar_frame_potential(dim, 2),
        histogram: histogram.clone(),
    };
    let mut out = vec![
        Artifact::new("framepotential_histogram.csv", histogram_to_csv(&histogram)),
        record(cfg, &report)?,
    ];
    if cfg.plots {
        let centers: Vec<(f64, f64)> = histogram
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let mid = (histogram.bin_edges[k] + histogram.bin_edges[k + 1]) / 2.0;
                (mid, c as f64)
            })
            .collect();
        let p = LinePlot {
            title: format!(
                "Fidelity distribution, {} L={} (F1 = {})",
                spec.family.name(),
                spec.layers,
                fmt_num(report.frame_potential_t1)
            ),
            x_label: "|<psi|phi>|^2".into(),
            y_label: "count".into(),
            series: vec![Series {
                label: spec.family.name().into(),
                points: centers,
            }],
        };
        out.push(Artifact::new("framepotential_histogram.svg", p.to_svg()));
    }
    Ok(out)
}
