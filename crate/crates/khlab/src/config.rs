use std::fmt;
use std::path::Path;

use khlab_core::hamiltonian::{ModelSpec, Perturbation};
use khlab_core::zeromode::ZeroModeKind;
use khlab_core::Axis;
use khlab_iontrap::TrapConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    Dynamics,
    Zeromode,
    Iontrap,
    IontrapDynamics,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::Dynamics => "dynamics",
            Mode::Zeromode => "zeromode",
            Mode::Iontrap => "iontrap",
            Mode::IontrapDynamics => "iontrap-dynamics",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// Number of Lanczos levels; 0 requests the full dense spectrum.
    #[serde(default)]
    pub lowest: usize,
    /// Half-chain style entropy `S(l)` of the ground state for every cut.
    #[serde(default)]
    pub entropy: bool,
    #[serde(default)]
    pub structure_factor: Vec<Axis>,
}

fn default_interval() -> f64 {
    0.5
}
fn default_samples() -> usize {
    64
}
fn default_sites() -> Vec<usize> {
    vec![1]
}
fn default_axes() -> Vec<Axis> {
    vec![Axis::Y]
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "default_interval")]
    pub interval: f64,
    /// RK4 step; defaults to `0.1 / sum|c|`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(rename = "N", default = "default_samples")]
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_sites")]
    pub sites: Vec<usize>,
    #[serde(default = "default_axes")]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed_edge: Option<i8>,
    /// Rerun the first trajectory at `dt / 2` and report the deviation.
    #[serde(default = "yes")]
    pub certify: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroModeParams {
    pub kind: ZeroModeKind,
    #[serde(rename = "L")]
    pub len: usize,
    pub delta: f64,
    #[serde(rename = "M", default)]
    pub m: f64,
    #[serde(default = "inter")]
    pub perturbation: Perturbation,
}

fn inter() -> Perturbation {
    Perturbation::Inter
}

/// One experiment as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeromode: Option<ZeroModeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapConfig>,
}

fn missing(mode: Mode, section: &str) -> CliError {
    CliError::Config(format!("mode {mode} requires a [{section}] section"))
}

impl ExperimentConfig {
    /// Parses TOML text, applies `section.key=value` overrides and checks the
    /// sections required by `mode`.
    pub fn parse(text: &str, overrides: &[String], mode: Mode) -> CliResult<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        // round trip through text so errors carry the offending line
        let resolved = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&resolved).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.resolve(mode)?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String], mode: Mode) -> CliResult<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse(&text, overrides, mode)
    }

    fn resolve(&mut self, mode: Mode) -> CliResult<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(CliError::Config(format!("mode: config says {m}, command is {mode}")));
            }
        }
        self.mode = Some(mode);
        match mode {
            Mode::Spectrum => {
                self.model.as_ref().ok_or_else(|| missing(mode, "model"))?.validate()?;
                self.spectrum.get_or_insert_with(SpectrumParams::default);
            }
            Mode::Dynamics => {
                self.model.as_ref().ok_or_else(|| missing(mode, "model"))?.validate()?;
                let d = self.dynamics.as_ref().ok_or_else(|| missing(mode, "dynamics"))?;
                check_dynamics(d, self.model.as_ref().unwrap().len)?;
            }
            Mode::Zeromode => {
                self.zeromode.as_ref().ok_or_else(|| missing(mode, "zeromode"))?;
            }
            Mode::Iontrap | Mode::IontrapDynamics => {
                self.trap.get_or_insert_with(TrapConfig::default).validate()?;
                if mode == Mode::IontrapDynamics {
                    let d = self.dynamics.as_ref().ok_or_else(|| missing(mode, "dynamics"))?;
                    check_dynamics(d, self.trap.as_ref().unwrap().l_active)?;
                }
            }
        }
        Ok(())
    }
}

fn check_dynamics(d: &DynamicsParams, len: usize) -> CliResult<()> {
    let bad = |m: String| Err(CliError::Config(format!("dynamics.{m}")));
    if d.n == 0 {
        return bad("N must be positive".into());
    }
    if d.sites.is_empty() || d.axes.is_empty() {
        return bad("sites and axes must be non-empty".into());
    }
    if let Some(s) = d.sites.iter().find(|&&s| s == 0 || s > len) {
        return bad(format!("sites: {s} outside 1..={len}"));
    }
    if let Some(dt) = d.dt {
        if !(dt > 0.0) {
            return bad("dt must be positive".into());
        }
    }
    if matches!(d.fixed_edge, Some(s) if s != 1 && s != -1) {
        return bad("fixed_edge must be 1 or -1".into());
    }
    Ok(())
}

/// Applies `section.key=value` to a TOML table. The value is read as a TOML
/// literal, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override '{spec}' has an empty key")));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let (last, parents) = keys.split_last().unwrap();
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override '{spec}': '{k}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
