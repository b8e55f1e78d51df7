//! Run description: a flat `key = value` text format with dotted keys.
//!
//! ```text
//! # harmonic ground state
//! problem.kind = harmonic_oscillator
//! problem.omega = 1
//! problem.E = 0.5
//! sector.x.C = 0
//! output.dir = out/harmonic
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown and repeated keys are
//! rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linear::IntegrationSettings;
use crate::pipeline::{CertTolerances, PinneyOverride, TrajectoryRequest};
use crate::problems::{GridRequest, ProblemKind, ProblemSpec};

/// Environment variable overriding `output.dir`.
pub const OUTPUT_ENV: &str = "ERMAKOV_OUT";
pub const DEFAULT_OUTPUT_DIR: &str = "ermakov_out";
pub const DEFAULT_TRAJECTORY_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "json-lines" => Ok(OutputFormat::Jsonl),
            other => Err(Error::Config(format!("unknown output format `{other}` (csv, jsonl)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub pinney: BTreeMap<String, PinneyOverride>,
    pub trajectories: BTreeMap<String, TrajectoryRequest>,
    pub settings: IntegrationSettings,
    pub tolerances: CertTolerances,
    pub enforce_flux: bool,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    /// Default run of a preset.
    pub fn new(problem: ProblemSpec) -> Self {
        RunConfig {
            problem,
            pinney: BTreeMap::new(),
            trajectories: BTreeMap::new(),
            settings: IntegrationSettings::default(),
            tolerances: CertTolerances::default(),
            enforce_flux: false,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            format: OutputFormat::Csv,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    /// `output.dir`, unless the environment overrides it.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

fn config_err(line: usize, msg: impl fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn real(line: usize, key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(config_err(line, format!("`{key}` expects a finite number, got `{value}`"))),
    }
}

fn count(line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| config_err(line, format!("`{key}` expects a count, got `{value}`")))
}

fn flag(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(config_err(line, format!("`{key}` expects true or false, got `{value}`"))),
    }
}

#[derive(Default)]
struct PartialTrajectory {
    x0: Option<f64>,
    t_end: Option<f64>,
    samples: Option<usize>,
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut order = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| config_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(config_err(line, "empty key or value"));
            }
            if let Some((first, _)) = entries.insert(key, (line, value)) {
                return Err(config_err(line, format!("`{key}` already set on line {first}")));
            }
            order.push(key);
        }

        let (kind_line, kind) = entries.get("problem.kind").copied().ok_or_else(|| {
            Error::Config(format!(
                "missing `problem.kind` ({})",
                ProblemKind::ALL.iter().map(|k| k.key()).collect::<Vec<_>>().join(", ")
            ))
        })?;
        let kind: ProblemKind = kind.parse().map_err(|e| config_err(kind_line, e))?;
        let mut config = RunConfig::new(ProblemSpec::new(kind));
        let mut trajectories: BTreeMap<String, PartialTrajectory> = BTreeMap::new();

        for key in order {
            let (line, value) = entries[key];
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["problem", "kind"] => {}
                ["problem", "m"] => config.problem.mass = real(line, key, value)?,
                ["problem", "hbar"] => config.problem.hbar = real(line, key, value)?,
                ["problem", "parity"] => config.problem.parity = value.parse().map_err(|e| config_err(line, e))?,
                ["problem", param] if kind.param_keys().contains(param) => {
                    config.problem.params.insert(param.to_string(), real(line, key, value)?);
                }
                ["sector", label, field] => {
                    if !kind.labels().contains(label) {
                        return Err(config_err(
                            line,
                            format!("`{kind}` has no sector `{label}` (sectors: {})", kind.labels().join(", ")),
                        ));
                    }
                    let label = label.to_string();
                    match *field {
                        "C" => {
                            config.problem.flux.insert(label, real(line, key, value)?);
                        }
                        "A" | "B" | "D" => {
                            let over = config.pinney.entry(label).or_default();
                            let v = Some(real(line, key, value)?);
                            match *field {
                                "A" => over.a = v,
                                "B" => over.b = v,
                                _ => over.d = v,
                            }
                        }
                        "lo" | "hi" | "points" => {
                            let grid = config.problem.grids.entry(label).or_insert_with(GridRequest::default);
                            match *field {
                                "lo" => grid.lo = Some(real(line, key, value)?),
                                "hi" => grid.hi = Some(real(line, key, value)?),
                                _ => grid.points = Some(count(line, key, value)?),
                            }
                        }
                        _ => return Err(config_err(line, format!("unknown key `{key}`"))),
                    }
                }
                ["trajectory", label, field] => {
                    if !kind.labels().contains(label) {
                        return Err(config_err(line, format!("`{kind}` has no sector `{label}`")));
                    }
                    let t = trajectories.entry(label.to_string()).or_default();
                    match *field {
                        "x0" => t.x0 = Some(real(line, key, value)?),
                        "t_end" => t.t_end = Some(real(line, key, value)?),
                        "samples" => t.samples = Some(count(line, key, value)?),
                        _ => return Err(config_err(line, format!("unknown key `{key}`"))),
                    }
                }
                ["integration", "rel_tol"] => config.settings.rel_tol = real(line, key, value)?,
                ["integration", "abs_tol"] => config.settings.abs_tol = real(line, key, value)?,
                ["integration", "max_step"] => config.settings.max_step = real(line, key, value)?,
                ["tolerance", name] => config.tolerances.set(name, real(line, key, value)?).map_err(|e| config_err(line, e))?,
                ["flux", "enforce"] => config.enforce_flux = flag(line, key, value)?,
                ["output", "dir"] => config.output_dir = PathBuf::from(value),
                ["output", "format"] => config.format = value.parse().map_err(|e| config_err(line, e))?,
                _ => return Err(config_err(line, format!("unknown key `{key}`"))),
            }
        }

        for (label, t) in trajectories {
            let (Some(x0), Some(t_end)) = (t.x0, t.t_end) else {
                return Err(Error::Config(format!("trajectory.{label} needs both x0 and t_end")));
            };
            let samples = t.samples.unwrap_or(DEFAULT_TRAJECTORY_SAMPLES);
            if !(t_end > 0.0) || samples < 2 {
                return Err(Error::Config(format!("trajectory.{label} needs t_end > 0 and at least 2 samples")));
            }
            config.trajectories.insert(label, TrajectoryRequest { x0, t_end, samples });
        }
        config.settings.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }
}
