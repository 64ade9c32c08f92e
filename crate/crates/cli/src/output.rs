//! CSV rows, number formatting and file output.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::commands::Artifact;
use tfim_vqe::expressivity::Histogram;
use tfim_vqe::observables::ObservableReport;
use tfim_vqe::vqe::VqeResult;

/// Frozen column order of every per-point CSV.
pub const CSV_COLUMNS: [&str; 11] = [
    "hx",
    "energy",
    "exact_energy",
    "relative_error",
    "variance",
    "magnetization",
    "long_range_corr",
    "ee_single_site_ln2",
    "ee_half_cut",
    "n_evals",
    "restart_index_of_best",
];

pub const HISTOGRAM_COLUMNS: [&str; 3] = ["bin_low", "bin_high", "count"];

/// Significant digits of CSV numbers.
pub const SIG_DIGITS: usize = 12;

/// One CSV row. Empty cells stand for values that do not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub hx: f64,
    pub energy: f64,
    pub exact_energy: Option<f64>,
    pub relative_error: Option<f64>,
    pub variance: Option<f64>,
    pub magnetization: f64,
    pub long_range_corr: Option<f64>,
    pub ee_single_site_ln2: f64,
    pub ee_half_cut: f64,
    pub n_evals: Option<usize>,
    pub restart_index_of_best: Option<usize>,
}

impl Row {
    pub fn from_observables(hx: f64, obs: &ObservableReport) -> Self {
        Self {
            hx,
            energy: obs.energy,
            exact_energy: None,
            relative_error: None,
            variance: obs.variance,
            magnetization: obs.magnetization,
            long_range_corr: obs.long_range_corr,
            ee_single_site_ln2: obs.single_site_entropy_avg_log2,
            ee_half_cut: obs.half_cut_entropy,
            n_evals: None,
            restart_index_of_best: None,
        }
    }

    pub fn from_vqe(r: &VqeResult) -> Self {
        Self {
            energy: r.energy,
            exact_energy: r.exact_energy,
            relative_error: r.relative_error,
            n_evals: Some(r.n_evals),
            restart_index_of_best: Some(r.restart_index_of_best),
            ..Self::from_observables(r.hx, &r.observables)
        }
    }

    fn cells(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let count = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
        [
            fmt_num(self.hx),
            fmt_num(self.energy),
            opt(self.exact_energy),
            opt(self.relative_error),
            opt(self.variance),
            fmt_num(self.magnetization),
            opt(self.long_range_corr),
            fmt_num(self.ee_single_site_ln2),
            fmt_num(self.ee_half_cut),
            count(self.n_evals),
            count(self.restart_index_of_best),
        ]
    }
}

/// `v` with [`SIG_DIGITS`] significant digits, trailing zeros dropped.
/// Plain notation for exponents in `-5..12`, scientific otherwise.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.cells().join(","));
        out.push('\n');
    }
    out
}

pub fn histogram_to_csv(h: &Histogram) -> String {
    let mut out = HISTOGRAM_COLUMNS.join(",");
    out.push('\n');
    for (k, count) in h.counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{count}\n",
            fmt_num(h.bin_edges[k]),
            fmt_num(h.bin_edges[k + 1])
        ));
    }
    out
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
