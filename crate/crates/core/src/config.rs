//! Experiment configuration: one canonical TOML format with explicit
//! defaults matching the reference experiment protocol, validated on load.
//! Unknown keys are reported as warnings, never silently dropped.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::hyperbolic::RunOptions;
use crate::model::{Grid1D, InitialCondition, ModelParams};
use crate::travelingwave::{Route, WaveOptions};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub time: TimeConfig,
    pub ic: IcConfig,
    pub diagnostics: DiagnosticsConfig,
    pub wave: WaveConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            grid: GridConfig::default(),
            params: ParamsConfig::default(),
            time: TimeConfig::default(),
            ic: IcConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            wave: WaveConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, rename_all = "UPPERCASE")]
pub struct GridConfig {
    pub l: f64,
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { l: 20.0, m: 2000 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct ParamsConfig {
    pub sigma: f64,
    pub chi: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { sigma: 1.0, chi: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct TimeConfig {
    #[serde(rename = "T_final")]
    pub t_final: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub snapshot_times: Vec<f64>,
    pub sample_interval: f64,
    pub reaction: bool,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_final: 40.0,
            cfl: 0.45,
            dt_max: 0.1,
            snapshot_times: vec![0.0, 10.0, 25.0, 40.0],
            sample_interval: 0.5,
            reaction: true,
        }
    }
}

/// Initial-condition descriptor; `kind` selects the profile, the remaining
/// fields apply where meaningful.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct IcConfig {
    pub kind: String,
    /// Right support endpoint for `polynomial`; center for `sigmoid`.
    pub x0: f64,
    /// Steepness of `sigmoid`.
    pub alpha: f64,
    /// Level of `constant`.
    pub value: f64,
}

impl Default for IcConfig {
    fn default() -> Self {
        IcConfig { kind: "polynomial".into(), x0: -15.0, alpha: 1.0, value: 0.5 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct DiagnosticsConfig {
    pub betas: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
    pub jump_window: usize,
    pub front_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            betas: vec![0.0, 0.2, 0.6667, 0.8],
            t1: 15.0,
            t2: 40.0,
            jump_window: 3,
            front_threshold: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct WaveConfig {
    pub dz: f64,
    #[serde(rename = "Z")]
    pub z_len: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the stopping norm; 0 means "use 1/(2 sigma)".
    pub eta: f64,
    pub route: String,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig { dz: 2e-3, z_len: 0.0, tol: 1e-10, max_iter: 400, eta: 0.0, route: "ode".into() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Output directory; empty means CLI flag / environment / cwd.
    pub directory: String,
    pub prefix: String,
}

impl ExperimentConfig {
    /// Parse and validate a config file; returns the config plus warnings
    /// for unrecognized keys.
    pub fn parse(path: &Path) -> Result<(Self, Vec<String>)> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<(Self, Vec<String>)> {
        let value: toml::Value =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse failure: {e}")))?;
        let warnings = unknown_keys(&value);
        let cfg: ExperimentConfig =
            value.try_into().map_err(|e| Error::Config(format!("invalid key: {e}")))?;
        cfg.validate()?;
        Ok((cfg, warnings))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.grid.m < 16 {
            return Err(Error::Config(format!("grid.M must be at least 16, got {}", self.grid.m)));
        }
        if !(self.time.t_final > 0.0) {
            return Err(Error::Config("time.T_final must be positive".into()));
        }
        if !(self.time.cfl > 0.0 && self.time.cfl <= 1.0) {
            return Err(Error::Config(format!("time.cfl must lie in (0, 1], got {}", self.time.cfl)));
        }
        let d = &self.diagnostics;
        if !(d.t1 > 0.0 && d.t1 < d.t2 && d.t2 <= self.time.t_final) {
            return Err(Error::Config(format!(
                "need 0 < t1 < t2 <= T_final, got t1={}, t2={}, T_final={}",
                d.t1, d.t2, self.time.t_final
            )));
        }
        for &b in &d.betas {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("diagnostics.betas entries must lie in [0, 1), got {b}")));
            }
        }
        Route::from_name(&self.wave.route)?;
        self.initial_condition()?;
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.params.sigma, self.params.chi)
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.l, self.grid.m)
    }

    pub fn initial_condition(&self) -> Result<InitialCondition> {
        match self.ic.kind.as_str() {
            "polynomial" => Ok(InitialCondition::Polynomial { l: self.grid.l, x0: self.ic.x0 }),
            "ramp" => Ok(InitialCondition::Ramp),
            "plateau_ramp" => Ok(InitialCondition::PlateauRamp),
            "sigmoid" => Ok(InitialCondition::Sigmoid { alpha: self.ic.alpha, x0: self.ic.x0 }),
            "constant" => {
                if !(0.0..=1.0).contains(&self.ic.value) {
                    return Err(Error::Config(format!(
                        "ic.value must lie in [0, 1], got {}",
                        self.ic.value
                    )));
                }
                Ok(InitialCondition::Constant { value: self.ic.value })
            }
            other => Err(Error::Config(format!(
                "unknown ic.kind {other:?} (expected polynomial, ramp, plateau_ramp, sigmoid or constant)"
            ))),
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            t_final: self.time.t_final,
            cfl: self.time.cfl,
            dt_max: self.time.dt_max,
            sample_interval: self.time.sample_interval,
            reaction: self.time.reaction,
            betas: self.diagnostics.betas.clone(),
            front_threshold: self.diagnostics.front_threshold,
            jump_window: self.diagnostics.jump_window,
            snapshot_times: self.time.snapshot_times.clone(),
        }
    }

    pub fn wave_options(&self, params: &ModelParams) -> Result<WaveOptions> {
        let defaults = WaveOptions::for_params(params);
        Ok(WaveOptions {
            dz: self.wave.dz,
            z_len: if self.wave.z_len > 0.0 { self.wave.z_len } else { defaults.z_len },
            tol: self.wave.tol,
            max_iter: self.wave.max_iter,
            eta: if self.wave.eta > 0.0 { self.wave.eta } else { defaults.eta },
            route: Route::from_name(&self.wave.route)?,
        })
    }

    /// Output directory resolution: config value, else `dir_flag`, else the
    /// environment default, else the current directory.
    pub fn output_dir(&self, dir_flag: Option<&Path>) -> PathBuf {
        if !self.output.directory.is_empty() {
            return PathBuf::from(&self.output.directory);
        }
        if let Some(d) = dir_flag {
            return d.to_path_buf();
        }
        if let Ok(d) = std::env::var("KSWAVE_OUT_DIR") {
            if !d.is_empty() {
                return PathBuf::from(d);
            }
        }
        PathBuf::from(".")
    }
}

/// Collect dotted paths of keys not present in the schema.
fn unknown_keys(value: &toml::Value) -> Vec<String> {
    const TOP: &[&str] = &[
        "schema_version", "grid", "params", "time", "ic", "diagnostics", "wave", "output",
    ];
    const SECTIONS: &[(&str, &[&str])] = &[
        ("grid", &["L", "M"]),
        ("params", &["sigma", "chi"]),
        ("time", &["T_final", "cfl", "dt_max", "snapshot_times", "sample_interval", "reaction"]),
        ("ic", &["kind", "x0", "alpha", "value"]),
        ("diagnostics", &["betas", "t1", "t2", "jump_window", "front_threshold"]),
        ("wave", &["dz", "Z", "tol", "max_iter", "eta", "route"]),
        ("output", &["directory", "prefix"]),
    ];
    let mut warnings = Vec::new();
    let Some(table) = value.as_table() else {
        return warnings;
    };
    for (key, sub) in table {
        if !TOP.contains(&key.as_str()) {
            warnings.push(format!("unknown key `{key}`"));
            continue;
        }
        if let Some((_, known)) = SECTIONS.iter().find(|(s, _)| s == key) {
            if let Some(subtable) = sub.as_table() {
                for subkey in subtable.keys() {
                    if !known.contains(&subkey.as_str()) {
                        warnings.push(format!("unknown key `{key}.{subkey}`"));
                    }
                }
            }
        }
    }
    warnings
}
