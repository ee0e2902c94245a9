//! Flat key/value experiment configuration with per-command defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("ConfigError: {field}: {message}")]
    Field { field: String, message: String },
    #[error("ConfigError: cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("ConfigError: unknown command `{0}`")]
    UnknownCommand(String),
}

impl ConfigError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        Self::Field { field: field.to_string(), message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Dispersion,
    Phasematch,
    CombGroundState,
    WitnessScan,
    DickeSteady,
    DickeDynamics,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Dispersion,
        Command::Phasematch,
        Command::CombGroundState,
        Command::WitnessScan,
        Command::DickeSteady,
        Command::DickeDynamics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Phasematch => "phasematch",
            Command::CombGroundState => "comb-ground-state",
            Command::WitnessScan => "witness-scan",
            Command::DickeSteady => "dicke-steady",
            Command::DickeDynamics => "dicke-dynamics",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| ConfigError::UnknownCommand(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// Nonnegative integer.
    Int,
    Bool,
}

/// One accepted key. A `None` default means the key is optional and computed when absent.
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<f64>,
    pub doc: &'static str,
}

const fn float(name: &'static str, default: f64, doc: &'static str) -> Key {
    Key { name, kind: Kind::Float, default: Some(default), doc }
}

const fn int(name: &'static str, default: f64, doc: &'static str) -> Key {
    Key { name, kind: Kind::Int, default: Some(default), doc }
}

const fn flag(name: &'static str, default: bool, doc: &'static str) -> Key {
    Key { name, kind: Kind::Bool, default: Some(if default { 1.0 } else { 0.0 }), doc }
}

const fn optional(name: &'static str, kind: Kind, doc: &'static str) -> Key {
    Key { name, kind, default: None, doc }
}

const CAVITY: &[Key] = &[
    float("e_c", 1.5, "cavity photon energy at k = 0 (eV)"),
    float("e_x", 1.5, "exciton energy (eV)"),
    float("hbar_omega", 2e-3, "half the vacuum Rabi splitting (eV)"),
    float("e_b", 1e-2, "exciton binding energy (eV)"),
    float("r_x", 1.0, "exciton radius"),
    float("area", 1.0, "sample area, same length unit as r_x squared"),
];

const COMB: &[Key] = &[
    int("n_lines", 2.0, "comb lines on each side of the centre"),
    float("k0", 0.015, "central wave number, hbar c k0 / E_C"),
    float("dk0", 0.004, "line spacing, hbar c dk0 / E_C"),
    float("gamma", 1e-6, "polariton broadening (eV)"),
];

const DICKE: &[Key] = &[
    float("drive_amplitude", 1e-4, "laser amplitude Omega_d / omega_r"),
    float("lambda", 1e-2, "bath coupling lambda / omega_r"),
    optional("lambda_cavity", Kind::Float, "cavity bath coupling; defaults to lambda"),
    optional("lambda_emitter", Kind::Float, "emitter bath coupling; defaults to lambda"),
    optional("n_ph", Kind::Int, "cavity Fock cutoff; 12 for g <= 0.7, 16 above"),
    int("samples", 256.0, "time samples per drive period"),
    int("nu_max", 8.0, "minimum Fourier cutoff of the Floquet states"),
    flag("auto_nu_max", true, "raise nu_max until the Fourier tail is below 5e-7"),
    flag("lamb_shift", false, "include the Lamb-shift phases of the coherences"),
    flag("check_cutoff", true, "repeat at n_ph + 4 and fail on a larger change"),
    float("cutoff_tolerance", 0.05, "relative EOF change allowed by the cutoff check"),
];

pub fn schema(cmd: Command) -> Vec<&'static Key> {
    static DISPERSION: &[Key] = &[
        float("k_min", -0.05, "smallest hbar c k / E_C"),
        float("k_max", 0.05, "largest hbar c k / E_C"),
        int("n_k", 201.0, "grid points"),
    ];
    static PHASEMATCH: &[Key] = &[
        int("per_line", 8.0, "grid nodes per comb spacing"),
        float("pump_amplitude", 1.0, "uniform pump amplitude P_n"),
    ];
    static COMB_STATE: &[Key] = &[
        optional("pump_amplitude", Kind::Float, "uniform pump amplitude; by default half the stability bound"),
        float("stability_fraction", 0.5, "spectral radius of the coupling over min E_1 / 2 for the default pump"),
    ];
    static STEADY: &[Key] = &[
        float("g_min", 0.3, "smallest coupling g / omega_r"),
        float("g_max", 1.2, "largest coupling g / omega_r"),
        int("n_g", 6.0, "couplings"),
        float("kt_min", 0.05, "lowest k_B T / hbar omega_r"),
        float("kt_max", 0.5, "highest k_B T / hbar omega_r"),
        int("n_kt", 6.0, "temperatures"),
    ];
    static DYNAMICS: &[Key] = &[
        float("g", 0.45, "coupling g / omega_r"),
        float("kt", 0.07, "k_B T / hbar omega_r"),
        int("periods", 20.0, "drive periods"),
        int("samples_per_period", 16.0, "output times per period"),
    ];
    let parts: Vec<&'static [Key]> = match cmd {
        Command::Dispersion => vec![CAVITY, DISPERSION],
        Command::Phasematch => vec![CAVITY, COMB, PHASEMATCH],
        Command::CombGroundState | Command::WitnessScan => vec![CAVITY, COMB, COMB_STATE],
        Command::DickeSteady => vec![STEADY, DICKE],
        Command::DickeDynamics => vec![DYNAMICS, DICKE],
    };
    parts.into_iter().flatten().collect()
}

/// Table of accepted keys and defaults for every command.
pub fn keys_help() -> String {
    let mut out = String::from("Parameters (--set key=value or config file keys; output_path is always accepted):\n");
    for cmd in Command::ALL {
        out.push_str(&format!("\n  {}\n", cmd.name()));
        for k in schema(cmd) {
            let default = match (k.default, k.kind) {
                (None, _) => "computed".to_string(),
                (Some(d), Kind::Bool) => (d != 0.0).to_string(),
                (Some(d), _) => d.to_string(),
            };
            out.push_str(&format!("    {:<20} {:<10} {}\n", k.name, default, k.doc));
        }
    }
    out
}

/// Validated configuration with every defaulted key filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub output_path: PathBuf,
    pub values: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn f64(&self, key: &str) -> f64 {
        self.values[key].as_f64().expect("validated float")
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.values.get(key).map(|v| v.as_f64().expect("validated float"))
    }

    pub fn usize(&self, key: &str) -> usize {
        self.values[key].as_u64().expect("validated integer") as usize
    }

    pub fn opt_usize(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|v| v.as_u64().expect("validated integer") as usize)
    }

    pub fn bool(&self, key: &str) -> bool {
        self.values[key].as_bool().expect("validated flag")
    }

    /// Parameter record as a JSON object, `output_path` included.
    pub fn to_json(&self) -> Value {
        let mut m: Map<String, Value> = self.values.clone().into_iter().collect();
        m.insert("output_path".into(), Value::String(self.output_path.to_string_lossy().into_owned()));
        Value::Object(m)
    }
}

/// Reads a flat JSON object from `path`.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(ConfigError::Read { path: path.display().to_string(), message: "expected a JSON object".into() }),
        Err(e) => Err(ConfigError::Read { path: path.display().to_string(), message: e.to_string() }),
    }
}

/// Splits `key=value`; the value is read as JSON when possible and as a string otherwise.
pub fn parse_override(s: &str) -> Result<(String, Value), ConfigError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::field(s, "expected key=value"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(ConfigError::field(s, "empty key"));
    }
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

fn coerce(key: &Key, v: &Value) -> Result<Value, ConfigError> {
    let bad = |m: &str| Err(ConfigError::field(key.name, m.to_string()));
    match key.kind {
        Kind::Float => match v {
            Value::Number(n) => {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if !x.is_finite() {
                    return bad("must be finite");
                }
                Ok(Value::Number(Number::from_f64(x).expect("finite")))
            }
            _ => bad("expected a number"),
        },
        Kind::Int => match v {
            Value::Number(n) => {
                if let Some(u) = n.as_u64() {
                    return Ok(Value::from(u));
                }
                match n.as_f64() {
                    Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53) => Ok(Value::from(x as u64)),
                    _ => bad("expected a nonnegative integer"),
                }
            }
            _ => bad("expected a nonnegative integer"),
        },
        Kind::Bool => match v {
            Value::Bool(b) => Ok(Value::Bool(*b)),
            _ => bad("expected true or false"),
        },
    }
}

fn default_value(key: &Key) -> Option<Value> {
    key.default.map(|d| match key.kind {
        Kind::Float => Value::Number(Number::from_f64(d).expect("finite default")),
        Kind::Int => Value::from(d as u64),
        Kind::Bool => Value::Bool(d != 0.0),
    })
}

/// Merges file entries, `--set` overrides and `--output`, then validates and fills defaults.
pub fn build_config(
    command: Command,
    file: Map<String, Value>,
    overrides: &[(String, Value)],
    output: Option<PathBuf>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut raw: BTreeMap<String, Value> = file.into_iter().collect();
    for (k, v) in overrides {
        raw.insert(k.clone(), v.clone());
    }
    if let Some(c) = raw.remove("command") {
        match c.as_str() {
            Some(s) if Command::parse(s)? == command => {}
            Some(s) => return Err(ConfigError::field("command", format!("file says `{s}` but `{}` was requested", command.name()))),
            None => return Err(ConfigError::field("command", "expected a string")),
        }
    }
    let file_output = match raw.remove("output_path") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(ConfigError::field("output_path", "expected a string")),
        None => None,
    };
    let output_path = output
        .or(file_output)
        .ok_or_else(|| ConfigError::field("output_path", "required (set it in the config file or with --output)"))?;
    if output_path.as_os_str().is_empty() {
        return Err(ConfigError::field("output_path", "must not be empty"));
    }
    let keys = schema(command);
    if let Some(unknown) = raw.keys().find(|k| !keys.iter().any(|key| key.name == k.as_str())) {
        return Err(ConfigError::field(unknown, format!("unknown key for `{}`", command.name())));
    }
    let mut values = BTreeMap::new();
    for key in keys {
        let v = match raw.get(key.name) {
            Some(v) => Some(coerce(key, v)?),
            None => default_value(key),
        };
        if let Some(v) = v {
            values.insert(key.name.to_string(), v);
        }
    }
    let cfg = ExperimentConfig { command, output_path, values };
    check_ranges(&cfg)?;
    Ok(cfg)
}

fn check_ranges(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let positive = |k: &str| -> Result<(), ConfigError> {
        match cfg.opt_f64(k) {
            Some(x) if !(x > 0.0) => Err(ConfigError::field(k, "must be positive")),
            _ => Ok(()),
        }
    };
    let nonneg = |k: &str| -> Result<(), ConfigError> {
        match cfg.opt_f64(k) {
            Some(x) if x < 0.0 => Err(ConfigError::field(k, "must be nonnegative")),
            _ => Ok(()),
        }
    };
    let at_least = |k: &str, m: usize| -> Result<(), ConfigError> {
        match cfg.opt_usize(k) {
            Some(x) if x < m => Err(ConfigError::field(k, format!("must be at least {m}"))),
            _ => Ok(()),
        }
    };
    for k in ["e_c", "e_x", "hbar_omega", "e_b", "r_x", "area", "k0", "dk0", "gamma"] {
        positive(k)?;
    }
    for k in ["drive_amplitude", "lambda", "lambda_cavity", "lambda_emitter", "g", "kt", "g_min", "kt_min"] {
        nonneg(k)?;
    }
    at_least("n_lines", 1)?;
    at_least("n_k", 2)?;
    at_least("per_line", 1)?;
    at_least("n_ph", 1)?;
    at_least("samples", 64)?;
    at_least("nu_max", 1)?;
    at_least("n_g", 1)?;
    at_least("n_kt", 1)?;
    at_least("periods", 1)?;
    at_least("samples_per_period", 1)?;
    if let Some(f) = cfg.opt_f64("stability_fraction") {
        if !(f > 0.0 && f < 1.0) {
            return Err(ConfigError::field("stability_fraction", "must lie in (0, 1)"));
        }
    }
    if let Some(t) = cfg.opt_f64("cutoff_tolerance") {
        if !(t > 0.0) {
            return Err(ConfigError::field("cutoff_tolerance", "must be positive"));
        }
    }
    for (lo, hi) in [("k_min", "k_max"), ("g_min", "g_max"), ("kt_min", "kt_max")] {
        if let (Some(a), Some(b)) = (cfg.opt_f64(lo), cfg.opt_f64(hi)) {
            if a > b {
                return Err(ConfigError::field(hi, format!("must not be below {lo}")));
            }
        }
    }
    Ok(())
}

/// `n` evenly spaced values from `lo` to `hi`; `lo` alone when `n == 1`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}
