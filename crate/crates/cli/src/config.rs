//! Run configuration: a JSON object with one key per setting. Unknown keys
//! are rejected, defaults are resolved on load and the resolved form is what
//! gets serialized back, so a run record reloads to the same config.

use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use tfim_vqe::ansatz::{AnsatzSpec, Family, SbPlacement};
use tfim_vqe::optimizer::OptOptions;
use tfim_vqe::vqe::{InitMode, OptimizerKind, VqeConfig};
use tfim_vqe::LatticeSpec;

pub const DEFAULT_JZ: f64 = -1.0;
pub const DEFAULT_RESTARTS: usize = 5;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_EIGENVALUES: usize = 2;
pub const DEFAULT_EXACT_MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Vqe,
    Sweep,
    Ed,
    Observables,
    Framepotential,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Vqe => "vqe",
            Command::Sweep => "sweep",
            Command::Ed => "ed",
            Command::Observables => "observables",
            Command::Framepotential => "framepotential",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings after defaults are resolved. Keys a command does not use are
/// absent (`None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub dims: Vec<usize>,
    #[serde(default = "default_true")]
    pub periodic: bool,
    #[serde(default = "default_jz")]
    pub jz: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: String,
    #[serde(default = "default_true")]
    pub plots: bool,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hx_grid: Option<Vec<f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sb_placement: Option<SbPlacement>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt: Option<OptOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_mode: Option<InitMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_max_qubits: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_fresh_restarts: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_eigenvalues: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bins: Option<usize>,
}

fn default_true() -> bool {
    true
}

fn default_jz() -> f64 {
    DEFAULT_JZ
}

fn default_out() -> String {
    "out".into()
}

/// Which optional keys a command accepts, and which of those it requires.
struct KeySet {
    allowed: &'static [&'static str],
    required: &'static [&'static str],
}

const VQE_KEYS: &[&str] = &[
    "hx",
    "ansatz",
    "layers",
    "sb_placement",
    "optimizer",
    "opt",
    "restarts",
    "init_mode",
    "exact",
    "exact_max_qubits",
];
const SWEEP_KEYS: &[&str] = &[
    "hx_grid",
    "ansatz",
    "layers",
    "sb_placement",
    "optimizer",
    "opt",
    "restarts",
    "init_mode",
    "exact",
    "exact_max_qubits",
    "warm_start",
    "warm_fresh_restarts",
];
const ED_KEYS: &[&str] = &["hx", "hx_grid", "n_eigenvalues"];
const OBSERVABLE_KEYS: &[&str] = &[
    "hx",
    "ansatz",
    "layers",
    "sb_placement",
    "params",
    "exact",
    "exact_max_qubits",
];
const FRAME_KEYS: &[&str] = &["ansatz", "layers", "sb_placement", "n_samples", "n_bins"];

fn keys_for(c: Command) -> KeySet {
    match c {
        Command::Vqe => KeySet {
            allowed: VQE_KEYS,
            required: &["hx", "ansatz", "layers"],
        },
        Command::Sweep => KeySet {
            allowed: SWEEP_KEYS,
            required: &["hx_grid", "ansatz", "layers"],
        },
        Command::Ed => KeySet {
            allowed: ED_KEYS,
            required: &[],
        },
        Command::Observables => KeySet {
            allowed: OBSERVABLE_KEYS,
            required: &["hx", "ansatz", "layers", "params"],
        },
        Command::Framepotential => KeySet {
            allowed: FRAME_KEYS,
            required: &["ansatz", "layers"],
        },
    }
}

impl RunConfig {
    fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |k: &'static str, set: bool| {
            if set {
                keys.push(k);
            }
        };
        mark("hx", self.hx.is_some());
        mark("hx_grid", self.hx_grid.is_some());
        mark("ansatz", self.ansatz.is_some());
        mark("layers", self.layers.is_some());
        mark("sb_placement", self.sb_placement.is_some());
        mark("optimizer", self.optimizer.is_some());
        mark("opt", self.opt.is_some());
        mark("restarts", self.restarts.is_some());
        mark("init_mode", self.init_mode.is_some());
        mark("exact", self.exact.is_some());
        mark("exact_max_qubits", self.exact_max_qubits.is_some());
        mark("warm_start", self.warm_start.is_some());
        mark("warm_fresh_restarts", self.warm_fresh_restarts.is_some());
        mark("n_eigenvalues", self.n_eigenvalues.is_some());
        mark("params", self.params.is_some());
        mark("n_samples", self.n_samples.is_some());
        mark("n_bins", self.n_bins.is_some());
        keys
    }

    /// Checks keys against the command, then fills every default the command
    /// uses.
    fn resolve(mut self) -> Result<Self> {
        let keys = keys_for(self.command);
        let present = self.present();
        if let Some(k) = present.iter().find(|k| !keys.allowed.contains(k)) {
            bail!("key `{k}` is not used by command `{}`", self.command);
        }
        if let Some(k) = keys.required.iter().find(|k| !present.contains(k)) {
            bail!("key `{k}` is required by command `{}`", self.command);
        }
        if self.command == Command::Ed && self.hx.is_some() == self.hx_grid.is_some() {
            bail!("command `ed` needs exactly one of `hx` and `hx_grid`");
        }

        let lattice = LatticeSpec::new(&self.dims, self.periodic).context("key `dims`")?;
        if !self.jz.is_finite() {
            bail!("key `jz`: must be finite");
        }
        if let Some(hx) = self.hx {
            if !hx.is_finite() {
                bail!("key `hx`: must be finite");
            }
        }
        if let Some(grid) = &self.hx_grid {
            if grid.is_empty() {
                bail!("key `hx_grid`: must not be empty");
            }
            if grid.iter().any(|h| !h.is_finite()) {
                bail!("key `hx_grid`: values must be finite");
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                bail!("key `hx_grid`: values must be strictly increasing");
            }
        }

        if self.ansatz.is_some() {
            self.sb_placement.get_or_insert(SbPlacement::PerLayer);
            let spec = self.ansatz_spec(lattice.clone())?;
            spec.validate().context("key `layers`")?;
        }
        let optimizing = matches!(self.command, Command::Vqe | Command::Sweep);
        if optimizing {
            let family = self.ansatz.expect("required above");
            self.optimizer
                .get_or_insert(OptimizerKind::default_for(family));
            let opt = self.opt.get_or_insert_with(OptOptions::default);
            opt.validate().context("key `opt`")?;
            let restarts = *self.restarts.get_or_insert(DEFAULT_RESTARTS);
            if restarts == 0 {
                bail!("key `restarts`: must be at least 1");
            }
            self.init_mode.get_or_insert(InitMode::default_for(family));
        }
        if matches!(
            self.command,
            Command::Vqe | Command::Sweep | Command::Observables
        ) {
            self.exact.get_or_insert(true);
            self.exact_max_qubits
                .get_or_insert(DEFAULT_EXACT_MAX_QUBITS);
        }
        if self.command == Command::Sweep {
            // Three-dimensional lattices warm-start by default.
            self.warm_start.get_or_insert(lattice.n_dims() == 3);
            self.warm_fresh_restarts.get_or_insert(1);
        }
        if self.command == Command::Ed {
            let k = *self.n_eigenvalues.get_or_insert(DEFAULT_EIGENVALUES);
            if !(1..=4).contains(&k) {
                bail!("key `n_eigenvalues`: must be between 1 and 4");
            }
        }
        if self.command == Command::Observables {
            let expected = self.ansatz_spec(lattice.clone())?.n_params();
            let got = self.params.as_ref().map_or(0, Vec::len);
            if got != expected {
                bail!("key `params`: expected {expected} values, got {got}");
            }
        }
        if self.command == Command::Framepotential {
            if *self.n_samples.get_or_insert(DEFAULT_SAMPLES) == 0 {
                bail!("key `n_samples`: must be at least 1");
            }
            if *self.n_bins.get_or_insert(DEFAULT_BINS) == 0 {
                bail!("key `n_bins`: must be at least 1");
            }
        }
        Ok(self)
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        Ok(LatticeSpec::new(&self.dims, self.periodic)?)
    }

    pub fn ansatz_spec(&self, lattice: LatticeSpec) -> Result<AnsatzSpec> {
        let family = self
            .ansatz
            .ok_or_else(|| anyhow!("key `ansatz` is missing"))?;
        let layers = self
            .layers
            .ok_or_else(|| anyhow!("key `layers` is missing"))?;
        let mut spec = AnsatzSpec::new(family, layers, lattice);
        spec.sb_placement = self.sb_placement.unwrap_or_default();
        Ok(spec)
    }

    /// Driver settings for `vqe` and `sweep`.
    pub fn vqe_config(&self) -> Result<VqeConfig> {
        let spec = self.ansatz_spec(self.lattice()?)?;
        let mut cfg = VqeConfig::new(spec);
        cfg.jz = self.jz;
        cfg.seed = self.seed;
        if let Some(o) = self.optimizer {
            cfg.optimizer = o;
        }
        if let Some(o) = &self.opt {
            cfg.opt = o.clone();
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.init_mode {
            cfg.init_mode = m;
        }
        if let Some(e) = self.exact {
            cfg.exact = e;
        }
        if let Some(m) = self.exact_max_qubits {
            cfg.exact_max_qubits = m;
        }
        if let Some(w) = self.warm_fresh_restarts {
            cfg.warm_fresh_restarts = w;
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and resolves a config. Syntax and type errors carry line and
/// column; semantic errors name the offending key.
pub fn load_config(text: &str) -> Result<RunConfig> {
    let raw: RunConfig = serde_json::from_str(text).map_err(|e| anyhow!("config: {e}"))?;
    raw.resolve()
}

/// Values set on the command line; each replaces the key of the same name.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub dims: Option<Vec<usize>>,
    pub hx: Option<f64>,
    pub hx_grid: Option<Vec<f64>>,
    pub ansatz: Option<Family>,
    pub layers: Option<usize>,
    pub optimizer: Option<OptimizerKind>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub warm_start: Option<bool>,
    pub out: Option<String>,
}

impl Overrides {
    fn entries(&self) -> Vec<(&'static str, Value)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, val: Option<Value>| {
            if let Some(val) = val {
                v.push((k, val));
            }
        };
        let json = |x: &dyn erased::ToValue| x.to_value();
        put("command", self.command.as_ref().map(|c| json(c)));
        put("dims", self.dims.as_ref().map(|d| json(d)));
        put("hx", self.hx.as_ref().map(|h| json(h)));
        put("hx_grid", self.hx_grid.as_ref().map(|h| json(h)));
        put("ansatz", self.ansatz.as_ref().map(|a| json(a)));
        put("layers", self.layers.as_ref().map(|l| json(l)));
        put("optimizer", self.optimizer.as_ref().map(|o| json(o)));
        put("restarts", self.restarts.as_ref().map(|r| json(r)));
        put("seed", self.seed.as_ref().map(|s| json(s)));
        put("warm_start", self.warm_start.as_ref().map(|w| json(w)));
        put("out", self.out.as_ref().map(|o| json(o)));
        v
    }
}

mod erased {
    use serde::Serialize;
    use serde_json::Value;

    pub trait ToValue {
        fn to_value(&self) -> Value;
    }

    impl<T: Serialize> ToValue for T {
        fn to_value(&self) -> Value {
            serde_json::to_value(self).expect("plain values serialize")
        }
    }
}

/// Applies command-line overrides to config text (possibly empty) and loads
/// the result. A command in the file that differs from the override is an
/// error.
pub fn load_with_overrides(text: Option<&str>, overrides: &Overrides) -> Result<RunConfig> {
    let entries = overrides.entries();
    let mut object = match text {
        Some(t) => match serde_json::from_str::<Value>(t) {
            Ok(Value::Object(m)) => m,
            Ok(_) => bail!("config: expected a JSON object at the top level"),
            Err(_) => return load_config(t),
        },
        None => Map::new(),
    };
    if let Some(t) = text {
        // Check the file alone first so positions point into it. Missing
        // fields are only reported once the whole object has been read, so
        // no other error hides behind one; overrides may supply them.
        if let Err(e) = serde_json::from_str::<RunConfig>(t) {
            if !e.to_string().starts_with("missing field") {
                bail!("config: {e}");
            }
        }
    }
    let file_only = entries.iter().all(|(k, v)| object.get(*k) == Some(v));
    if let (Some(t), true) = (text, file_only) {
        return load_config(t);
    }
    if let (Some(file), Some(cli)) = (object.get("command"), &overrides.command) {
        if file != &serde_json::to_value(cli)? {
            bail!("key `command`: config says {file}, command line says `{cli}`");
        }
    }
    for (k, v) in entries {
        object.insert(k.to_string(), v);
    }
    let merged = serde_json::to_string_pretty(&Value::Object(object))?;
    load_config(&merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vqe_defaults_are_resolved() {
        let c = load_config(r#"{"command":"vqe","dims":[10],"hx":1.0,"ansatz":"HEA","layers":15}"#)
            .unwrap();
        assert_eq!(c.jz, -1.0);
        assert!(c.periodic);
        assert_eq!(c.optimizer, Some(OptimizerKind::Lbfgs));
        assert_eq!(c.restarts, Some(5));
        assert_eq!(c.init_mode, Some(InitMode::UniformRandom));
        assert_eq!(c.opt, Some(OptOptions::default()));
        assert_eq!(c.sb_placement, Some(SbPlacement::PerLayer));
        assert_eq!(c.warm_start, None);
        let json = c.to_json();
        assert!(json.contains("\"jz\": -1.0"));
        assert!(json.contains("\"restarts\": 5"));
    }

    #[test]
    fn missing_command_is_named() {
        let e = load_config(r#"{"dims":[10]}"#).unwrap_err().to_string();
        assert!(e.contains("command"), "{e}");
    }

    #[test]
    fn sweep_on_square_lattice() {
        let c = load_config(
            r#"{"command":"sweep","dims":[4,4],"hx_grid":[0.5,3.0,5.0],"ansatz":"HVA_SB","layers":10}"#,
        )
        .unwrap();
        assert_eq!(c.optimizer, Some(OptimizerKind::Cobyla));
        assert_eq!(c.warm_start, Some(false));
        let cube = load_config(
            r#"{"command":"sweep","dims":[2,2,2],"hx_grid":[1.0],"ansatz":"REAL_AMP","layers":4}"#,
        )
        .unwrap();
        assert_eq!(cube.warm_start, Some(true));
    }

    #[test]
    fn unknown_key_reports_position() {
        let e = load_config("{\"command\":\"vqe\",\n \"dimz\":[4]}")
            .unwrap_err()
            .to_string();
        assert!(e.contains("dimz") && e.contains("line 2"), "{e}");
        let e = load_config("{\"command\":\"vqe\",\n\"dims\":[4],\n\"hx\":\"x\"}")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = load_config("{\"command\": \"vqe\", ")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 1"), "{e}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let cases = [
            (
                r#"{"command":"vqe","dims":[4],"ansatz":"HEA","layers":2}"#,
                "hx",
            ),
            (
                r#"{"command":"vqe","dims":[4],"hx":1,"hx_grid":[1],"ansatz":"HEA","layers":2}"#,
                "hx_grid",
            ),
            (
                r#"{"command":"sweep","dims":[4],"hx_grid":[2,1],"ansatz":"HEA","layers":2}"#,
                "hx_grid",
            ),
            (
                r#"{"command":"vqe","dims":[1],"hx":1,"ansatz":"HEA","layers":2}"#,
                "dims",
            ),
            (
                r#"{"command":"vqe","dims":[4],"hx":1,"ansatz":"HEA","layers":0}"#,
                "layers",
            ),
            (
                r#"{"command":"vqe","dims":[4],"hx":1,"ansatz":"HEA","layers":1,"restarts":0}"#,
                "restarts",
            ),
            (r#"{"command":"ed","dims":[4]}"#, "hx"),
            (
                r#"{"command":"ed","dims":[4],"hx":1,"n_eigenvalues":9}"#,
                "n_eigenvalues",
            ),
            (
                r#"{"command":"observables","dims":[4],"hx":1,"ansatz":"HVA","layers":1,"params":[0]}"#,
                "params",
            ),
            (
                r#"{"command":"framepotential","dims":[4],"ansatz":"HEA","layers":1,"n_bins":0}"#,
                "n_bins",
            ),
            (
                r#"{"command":"vqe","dims":[4],"hx":1,"ansatz":"HEA","layers":1,"opt":{"grad_tol":-1}}"#,
                "opt",
            ),
        ];
        for (text, key) in cases {
            let e = format!("{:#}", load_config(text).unwrap_err());
            assert!(e.contains(key), "{text}: {e}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let texts = [
            r#"{"command":"vqe","dims":[10],"hx":1.0,"ansatz":"HEA","layers":15}"#,
            r#"{"command":"sweep","dims":[4,4],"hx_grid":[0.5,3.0,5.0],"ansatz":"HVA_SB","layers":10,"seed":9}"#,
            r#"{"command":"ed","dims":[6],"hx_grid":[0.1,0.2]}"#,
            r#"{"command":"observables","dims":[4],"hx":0.3,"ansatz":"HVA","layers":1,"params":[0.1,0.2]}"#,
            r#"{"command":"framepotential","dims":[4],"ansatz":"HEA","layers":8,"plots":false}"#,
        ];
        for t in texts {
            let c = load_config(t).unwrap();
            assert_eq!(load_config(&c.to_json()).unwrap(), c);
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let text = r#"{"command":"vqe","dims":[4],"hx":1.0,"ansatz":"HEA","layers":2}"#;
        let o = Overrides {
            hx: Some(0.25),
            seed: Some(3),
            ..Overrides::default()
        };
        let c = load_with_overrides(Some(text), &o).unwrap();
        assert_eq!(c.hx, Some(0.25));
        assert_eq!(c.seed, 3);
        let o = Overrides {
            command: Some(Command::Sweep),
            ..Overrides::default()
        };
        assert!(load_with_overrides(Some(text), &o).is_err());
        let flags_only = Overrides {
            command: Some(Command::Ed),
            dims: Some(vec![4]),
            hx: Some(1.0),
            ..Overrides::default()
        };
        let c = load_with_overrides(None, &flags_only).unwrap();
        assert_eq!(c.n_eigenvalues, Some(2));
        let same = Overrides {
            command: Some(Command::Vqe),
            ..Overrides::default()
        };
        let e = load_with_overrides(Some("{\"command\":\"vqe\",\n\"x\":1}"), &same).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn vqe_config_carries_settings() {
        let c = load_config(
            r#"{"command":"sweep","dims":[4],"hx_grid":[1.0],"ansatz":"HVA","layers":2,
                "seed":11,"restarts":2,"optimizer":"LBFGS","jz":-0.5}"#,
        )
        .unwrap();
        let v = c.vqe_config().unwrap();
        assert_eq!(v.seed, 11);
        assert_eq!(v.restarts, 2);
        assert_eq!(v.optimizer, OptimizerKind::Lbfgs);
        assert_eq!(v.jz, -0.5);
        assert_eq!(v.init_mode, InitMode::NearZero);
    }
}
