//! Resolved run configuration and the flat `key=value` file format.
//!
//! Values are layered as defaults, then `--config` file, then a figure
//! preset, then explicit flags. Every dataset header is itself a valid
//! config file, so a dataset can be regenerated from its own output.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cavity_rotation::analysis::{CriticalSearch, DetuningGrid};
use cavity_rotation::{CavityParams, MirrorPair, ResponseModel, SidebandState};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Reflectance,
    Sweep,
    Rotation,
    Critical,
    Bifurcation,
    Oracle,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Reflectance => "reflectance",
            Command::Sweep => "sweep",
            Command::Rotation => "rotation",
            Command::Critical => "critical",
            Command::Bifurcation => "bifurcation",
            Command::Oracle => "oracle",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "reflectance" => Command::Reflectance,
            "sweep" => Command::Sweep,
            "rotation" => Command::Rotation,
            "critical" => Command::Critical,
            "bifurcation" => Command::Bifurcation,
            "oracle" => Command::Oracle,
            other => return Err(CliError::invalid(format!("unknown command {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::invalid(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fig3,
    Fig6,
    Fig7,
    Fig8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Input-mirror intensity reflectivity `R1`.
    pub r1: f64,
    /// Output-mirror transmission (loss) `T2 = 1 - R2`.
    pub t2: f64,
    pub model: ResponseModel,
    pub sp: f64,
    pub sq: f64,
    pub nu: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    pub nu_min: f64,
    pub nu_max: f64,
    pub steps: usize,
    /// Bisection tolerance of the critical-point search.
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    /// Oracle detunings; `None` means `0` plus the sweep maxima.
    pub deltas: Option<Vec<f64>>,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Sampling groups; the data do not depend on it.
    pub partitions: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            r1: 0.95,
            t2: 0.003,
            model: ResponseModel::ExactAiry,
            sp: 0.5,
            sq: 2.0,
            nu: 6.0,
            delta_min: -12.0,
            delta_max: 12.0,
            points: 2001,
            nu_min: 0.2,
            nu_max: 10.0,
            steps: 197,
            tol: 1e-9,
            seed: 42,
            samples: 100_000,
            deltas: None,
            format: Format::Csv,
            out: None,
            partitions: 1,
        }
    }

    pub fn apply_preset(&mut self, preset: Preset) {
        match preset {
            Preset::Fig3 => {
                self.r1 = 0.95;
                self.t2 = 0.003;
                self.delta_min = -5.0;
                self.delta_max = 5.0;
                self.points = 1001;
            }
            Preset::Fig6 => {
                self.r1 = 0.95;
                self.t2 = 0.003;
                self.nu = 6.0;
                self.delta_min = -12.0;
                self.delta_max = 12.0;
                self.points = 2001;
            }
            Preset::Fig7 => {
                self.r1 = 0.95;
                self.t2 = 0.003;
                self.nu = 6.0;
                self.sp = 0.5;
                self.sq = 2.0;
                self.delta_min = -12.0;
                self.delta_max = 12.0;
                self.points = 2001;
            }
            Preset::Fig8 => {
                self.r1 = 0.999;
                self.t2 = 0.0;
                self.sp = 0.5;
                self.sq = 2.0;
                self.nu_min = 0.2;
                self.nu_max = 10.0;
                self.steps = 197;
            }
        }
    }

    /// Applies one `key=value` setting. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match normalize(key).as_str() {
            "command" => {
                let command: Command = value.parse()?;
                if command != self.command {
                    return Err(CliError::invalid(format!(
                        "config was written by `{}` but is being run as `{}`",
                        command.as_str(),
                        self.command.as_str()
                    )));
                }
            }
            "r1" => self.r1 = number(key, value)?,
            "t2" => self.t2 = number(key, value)?,
            "r2" => self.t2 = 1.0 - number(key, value)?,
            "model" => self.model = value.parse().map_err(CliError::Model)?,
            "sp" => self.sp = number(key, value)?,
            "sq" => self.sq = number(key, value)?,
            "nu" => self.nu = number(key, value)?,
            "delta_min" => self.delta_min = number(key, value)?,
            "delta_max" => self.delta_max = number(key, value)?,
            "points" => {
                self.points = count(value).map_err(|e| CliError::invalid(format!("{key}: {e}")))?
            }
            "nu_min" => self.nu_min = number(key, value)?,
            "nu_max" => self.nu_max = number(key, value)?,
            "steps" => {
                self.steps = count(value).map_err(|e| CliError::invalid(format!("{key}: {e}")))?
            }
            "tol" => self.tol = number(key, value)?,
            "seed" => {
                self.seed = value.parse().map_err(|_| {
                    CliError::invalid(format!("seed: {value:?} is not an unsigned integer"))
                })?
            }
            "samples" => {
                self.samples = count(value).map_err(|e| CliError::invalid(format!("{key}: {e}")))?
            }
            "deltas" => {
                self.deltas = if value == "auto" {
                    None
                } else {
                    Some(
                        value
                            .split(',')
                            .map(|v| number(key, v.trim()))
                            .collect::<Result<_, _>>()?,
                    )
                }
            }
            "format" => self.format = value.parse()?,
            "partitions" => {
                self.partitions =
                    count(value).map_err(|e| CliError::invalid(format!("{key}: {e}")))?
            }
            _ => return Err(CliError::invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Reads a config file: flat `key=value` lines (optionally behind `#`),
    /// or the `config` object of a JSON dataset. Reading stops at the first
    /// line that is neither, so CSV datasets can be passed directly.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if text.trim_start().starts_with('{') {
            return self.load_json(&text);
        }
        let mut r2_seen = false;
        let mut t2_seen = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (body, commented) = match line.strip_prefix('#') {
                Some(rest) => (rest.trim(), true),
                None => (line, false),
            };
            let Some((key, value)) = body.split_once('=') else {
                if commented {
                    continue;
                }
                break;
            };
            let key = key.trim();
            if commented && !is_known_key(key) {
                continue;
            }
            match normalize(key).as_str() {
                "r2" => r2_seen = true,
                "t2" => t2_seen = true,
                _ => {}
            }
            self.set(key, value)?;
        }
        if r2_seen && t2_seen {
            return Err(CliError::invalid("config file sets both t2 and r2"));
        }
        Ok(())
    }

    fn load_json(&mut self, text: &str) -> Result<(), CliError> {
        let doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::invalid(format!("config JSON: {e}")))?;
        let Some(config) = doc.get("config").and_then(|c| c.as_object()) else {
            return Err(CliError::invalid("config JSON has no \"config\" object"));
        };
        for (key, value) in config {
            let text = match value {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                other => {
                    return Err(CliError::invalid(format!(
                        "config key {key:?}: unsupported value {other}"
                    )))
                }
            };
            self.set(key, &text)?;
        }
        Ok(())
    }

    /// All settings that determine the data, in file order. Excludes the
    /// output path and the partition count.
    pub fn entries(&self) -> Vec<(&'static str, Value)> {
        use Value::{Count, Float, List, Text};
        let mut out = vec![
            ("command", Text(self.command.as_str().to_string())),
            ("r1", Float(self.r1)),
            ("t2", Float(self.t2)),
            ("model", Text(self.model.as_str().to_string())),
            ("sp", Float(self.sp)),
            ("sq", Float(self.sq)),
            ("nu", Float(self.nu)),
            ("delta_min", Float(self.delta_min)),
            ("delta_max", Float(self.delta_max)),
            ("points", Count(self.points as u64)),
            ("nu_min", Float(self.nu_min)),
            ("nu_max", Float(self.nu_max)),
            ("steps", Count(self.steps as u64)),
            ("tol", Float(self.tol)),
            ("seed", Count(self.seed)),
            ("samples", Count(self.samples as u64)),
        ];
        out.push((
            "deltas",
            match &self.deltas {
                Some(d) => List(d.clone()),
                None => Text("auto".to_string()),
            },
        ));
        out.push(("format", Text(self.format.as_str().to_string())));
        out
    }

    pub fn cavity(&self) -> Result<CavityParams, CliError> {
        let mirrors = MirrorPair::from_loss(self.r1, self.t2)?;
        Ok(CavityParams::new(mirrors, self.model)?)
    }

    pub fn state(&self) -> Result<SidebandState, CliError> {
        Ok(SidebandState::new(self.sp, self.sq, self.nu)?)
    }

    pub fn grid(&self) -> Result<DetuningGrid, CliError> {
        Ok(DetuningGrid::new(
            self.delta_min,
            self.delta_max,
            self.points,
        )?)
    }

    pub fn search(&self) -> CriticalSearch {
        CriticalSearch {
            tol: self.tol,
            ..CriticalSearch::default()
        }
    }

    /// Checks every range the command uses before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let cavity = self.cavity()?;
        let state = self.state()?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::invalid(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        if self.partitions == 0 {
            return Err(CliError::invalid("partitions must be at least 1"));
        }
        match self.command {
            Command::Reflectance | Command::Sweep | Command::Rotation => {
                self.grid()?.check_domain(&cavity)?;
            }
            Command::Critical => {
                let reach = self.search().domain_max(state.nu) + state.nu;
                cavity.check_domain(reach)?;
            }
            Command::Bifurcation => {
                if !(self.nu_min > 0.0 && self.nu_min <= self.nu_max && self.nu_max <= 20.0) {
                    return Err(CliError::invalid(format!(
                        "nu range [{}, {}] must lie within (0, 20]",
                        self.nu_min, self.nu_max
                    )));
                }
                if self.steps == 0 {
                    return Err(CliError::invalid("steps must be at least 1"));
                }
                state.with_nu(self.nu_min)?;
            }
            Command::Oracle => {
                if self.samples < cavity_rotation::oracle::MIN_SAMPLES {
                    return Err(CliError::invalid(format!(
                        "samples = {} is below the minimum of {}",
                        self.samples,
                        cavity_rotation::oracle::MIN_SAMPLES
                    )));
                }
                match &self.deltas {
                    Some(deltas) => {
                        if deltas.is_empty() {
                            return Err(CliError::invalid("deltas list is empty"));
                        }
                        for &d in deltas {
                            cavity.check_domain(d)?;
                            cavity.check_domain(d + state.nu)?;
                            cavity.check_domain(d - state.nu)?;
                        }
                    }
                    None => self.grid()?.check_domain(&cavity)?,
                }
            }
        }
        Ok(())
    }
}

/// A config value as written to dataset headers.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Count(u64),
    Text(String),
    List(Vec<f64>),
}

impl fmt::Display for Value {
    /// Floats use the shortest representation that parses back exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Text(s) => f.write_str(s),
            Value::List(items) => {
                let parts: Vec<String> = items.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "r1",
    "t2",
    "r2",
    "model",
    "sp",
    "sq",
    "nu",
    "delta_min",
    "delta_max",
    "points",
    "nu_min",
    "nu_max",
    "steps",
    "tol",
    "seed",
    "samples",
    "deltas",
    "format",
    "partitions",
];

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

fn is_known_key(key: &str) -> bool {
    KEYS.contains(&normalize(key).as_str())
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::invalid(format!(
            "{key}: {value:?} is not a finite number"
        ))),
    }
}

/// Parses a non-negative integer, also accepting forms like `1e5`.
pub fn count(value: &str) -> Result<usize, String> {
    if let Ok(n) = value.parse::<usize>() {
        return Ok(n);
    }
    match value.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 => Ok(x as usize),
        _ => Err(format!("{value:?} is not a non-negative integer")),
    }
}
