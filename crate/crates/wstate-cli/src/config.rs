//! JSON run configuration: physical parameters, per-subcommand run options,
//! and output settings. Unknown keys are rejected; every field has a default
//! except the lattice period, the trap frequency, and the dressing parameter.

use serde::Deserialize;
use thiserror::Error;
use wstate_core::params::{
    sweet_spot_detuning, PhysicalParams, C3_NQ50_OVER_HBAR, C3_NQ80_OVER_HBAR, RB87_MASS,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Frequency-input convention: `angular` takes every frequency as rad/s,
/// `cyclic` as Hz (multiplied by 2 pi on load). Applies to omega_b, delta,
/// beta_p, the dipole constant, and omega grids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Angular,
    Cyclic,
}

impl Units {
    fn factor(self) -> f64 {
        match self {
            Units::Angular => 1.0,
            Units::Cyclic => std::f64::consts::TAU,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum C3Preset {
    /// Principal quantum number 80: 2 pi x 40 GHz um^3.
    #[default]
    Nq80,
    /// Principal quantum number 50 (approximate): 2 pi x 4 GHz um^3.
    Nq50,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    /// Lattice period in um. Required.
    pub a_um: f64,
    /// Longitudinal trap frequency (see the units flag). Required.
    pub omega_b: f64,
    /// Dressing parameter. Required.
    pub alpha: f64,
    #[serde(default)]
    pub c3_preset: C3Preset,
    /// Overrides the preset when given, in (rad/s or Hz) um^3.
    #[serde(default)]
    pub c3_over_hbar: Option<f64>,
    /// Total detuning; defaults to the sweet-spot value for a_um.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_mass")]
    pub mass_kg: f64,
    #[serde(default = "default_n_sites")]
    pub n_sites: usize,
    #[serde(default = "default_max_bosons")]
    pub max_bosons: usize,
}

fn default_mass() -> f64 {
    RB87_MASS
}
fn default_n_sites() -> usize {
    8
}
fn default_max_bosons() -> usize {
    6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Sweep grid in the effective coupling lambda (converted to alpha).
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    /// Sweep grid directly in alpha.
    #[serde(default)]
    pub alpha_grid: Option<Vec<f64>>,
    /// Grid in the Rabi frequency for the K = pi curve (units flag applies).
    #[serde(default)]
    pub omega_grid: Option<Vec<f64>>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_true")]
    pub refine_critical: bool,
    /// Drive amplitude; defaults to beta_p_over_omega_d x |omega_d|.
    #[serde(default)]
    pub beta_p: Option<f64>,
    #[serde(default = "default_beta_ratio")]
    pub beta_p_over_omega_d: f64,
    /// Phase-winding index; defaults to N / 2 (the pi winding).
    #[serde(default)]
    pub q_d_index: Option<i64>,
    #[serde(default = "default_t_final_over_tau")]
    pub t_final_over_tau: f64,
    /// Integrator step, seconds; defaults to the stability-derived value.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_taylor_order")]
    pub taylor_order: usize,
    #[serde(default = "default_records")]
    pub records: usize,
    /// Half-cosine turn-on time, seconds; constant envelope when absent.
    #[serde(default)]
    pub ramp_time: Option<f64>,
}

fn default_tolerance() -> f64 {
    1e-10
}
fn default_max_iterations() -> usize {
    600
}
fn default_seed() -> u64 {
    1234
}
fn default_true() -> bool {
    true
}
fn default_beta_ratio() -> f64 {
    1e-3
}
fn default_t_final_over_tau() -> f64 {
    1.0
}
fn default_taylor_order() -> usize {
    16
}
fn default_records() -> usize {
    513
}

impl Default for RunBlock {
    fn default() -> Self {
        // route through serde so the field defaults stay the single source
        serde_json::from_str("{}").expect("empty run block deserializes")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub prefix: String,
    #[serde(default)]
    pub units: Units,
}

fn default_dir() -> String {
    ".".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty output block deserializes")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: PhysicalBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Config file plus the hash of its raw bytes (recorded in every output).
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load(path: &str) -> Result<LoadedConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let config: RunConfig = serde_json::from_slice(&bytes).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut hasher = <sha2::Sha256 as sha2::Digest>::new();
    sha2::Digest::update(&mut hasher, &bytes);
    let sha256 = hex_string(&sha2::Digest::finalize(hasher));
    Ok(LoadedConfig { config, sha256 })
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// Physical parameters with the units convention applied. Frequencies in
    /// the file are rad/s under `angular` and Hz under `cyclic`.
    pub fn physical_params(&self) -> Result<PhysicalParams, ConfigError> {
        let f = self.output.units.factor();
        let c3 = match (self.physical.c3_over_hbar, self.physical.c3_preset) {
            (Some(v), _) => v * f,
            (None, C3Preset::Nq80) => C3_NQ80_OVER_HBAR,
            (None, C3Preset::Nq50) => C3_NQ50_OVER_HBAR,
        };
        let a = self.physical.a_um;
        if !(a > 0.0) {
            return Err(ConfigError::Invalid(format!("a_um must be positive, got {a}")));
        }
        let delta = match self.physical.delta {
            Some(v) => v * f,
            None => sweet_spot_detuning(c3, a),
        };
        let p = PhysicalParams {
            c3_over_hbar: c3,
            a,
            omega_b: self.physical.omega_b * f,
            alpha: self.physical.alpha,
            delta,
            mass: self.physical.mass_kg,
            n_sites: self.physical.n_sites,
            max_bosons: self.physical.max_bosons,
        };
        p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(p)
    }

    /// Rabi-frequency grid with the units convention applied.
    pub fn omega_grid(&self) -> Option<Vec<f64>> {
        let f = self.output.units.factor();
        self.run.omega_grid.as_ref().map(|g| g.iter().map(|w| w * f).collect())
    }

    pub fn output_path(&self, name: &str) -> std::path::PathBuf {
        std::path::Path::new(&self.output.dir).join(format!("{}{}", self.output.prefix, name))
    }
}
