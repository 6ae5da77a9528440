//! TOML run configuration (schema version 1).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::billiard::BilliardSpec;
use crate::dynamics::{SystemKind, SystemSpec, DEFAULT_CTOL};
use crate::geometry::EllipsoidSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub seed: Option<u64>,
    pub system: Option<SystemSection>,
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub billiard: Option<BilliardSection>,
    pub verify: Option<VerifySection>,
    pub plot: Option<PlotSection>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub kind: String,
    pub axes: Vec<f64>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub mu: Vec<f64>,
    pub ctol: Option<f64>,
    /// `"auto"`, `"f"` (residues `f_i`, distinct axes only) or `"grouped"`.
    #[serde(default = "default_integrals")]
    pub integrals: String,
}

fn default_integrals() -> String {
    "auto".into()
}

/// Explicit initial state, in the block layout of the system kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_one")]
    pub record_every: usize,
    /// Expected return time; checked against the `return` tolerance.
    pub period: Option<f64>,
}

fn default_h() -> f64 {
    1e-3
}
fn default_t() -> f64 {
    10.0
}
fn default_one() -> usize {
    1
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection { h: default_h(), t: default_t(), record_every: 1, period: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilliardSection {
    pub axes: Vec<f64>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub mu: Vec<f64>,
    pub epsilon: Option<f64>,
    #[serde(default = "default_bounces")]
    pub bounces: usize,
    /// Compare every bounce with the ray-tracing oracle.
    #[serde(default)]
    pub oracle: bool,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub poncelet: Option<PonceletSection>,
    pub shoot: Option<ShootSection>,
}

fn default_bounces() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PonceletSection {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_closure")]
    pub tol: f64,
}

fn default_max_n() -> usize {
    12
}
fn default_closure() -> f64 {
    1e-6
}

/// Start from a periodic planar orbit of the given period and winding.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSection {
    pub period: usize,
    #[serde(default = "default_one")]
    pub winding: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default = "default_states")]
    pub states: usize,
}

fn default_states() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSection {
    /// Impacts or trajectory CSV; relative paths resolve against the config.
    pub input: Option<PathBuf>,
    #[serde(default = "default_plot_name")]
    pub output: String,
    /// Coordinates projected onto the picture plane.
    #[serde(default = "default_dims")]
    pub dims: [usize; 2],
    /// Caustic parameters drawn as confocal conics.
    #[serde(default)]
    pub caustics: Vec<f64>,
    /// Conic whose interior is drawn; defaults to the billiard axes.
    pub axes: Option<Vec<f64>>,
    /// Restrict the domain to the quarter plane `x_0, x_1 >= 0`.
    #[serde(default)]
    pub quarter: bool,
}

fn default_plot_name() -> String {
    "plot.svg".into()
}
fn default_dims() -> [usize; 2] {
    [0, 1]
}

/// Named thresholds; every entry can be overridden from the config or the
/// command line.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("drift", 1e-7),
        ("return", 1e-6),
        ("map_oracle", 1e-6),
        ("det_drift", 1e-8),
        ("caustic_drift", 1e-7),
        ("tangency", 1e-8),
        ("closure", 1e-6),
        ("lax_residual", 1e-7),
        ("bracket", 1e-6),
        ("bd_residual", 1e-6),
        ("hierarchy", 1e-9),
        ("reduction", 1e-7),
        ("rank_fraction", 0.95),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn config_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(plot) = cfg.plot.as_mut() {
            if let (Some(input), Some(dir)) = (plot.input.as_mut(), path.parent()) {
                if input.is_relative() {
                    *input = dir.join(&*input);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(config_error("schema", format!("unsupported version {} (expected {SCHEMA_VERSION})", cfg.schema)));
        }
        if let Some(s) = &cfg.system {
            check_axes("system.axes", &s.axes)?;
            check_finite("system.sigma", &[s.sigma])?;
            check_finite("system.sigmas", &s.sigmas)?;
            check_finite("system.mu", &s.mu)?;
            if !matches!(s.integrals.as_str(), "auto" | "f" | "grouped") {
                return Err(config_error("system.integrals", "expected \"auto\", \"f\" or \"grouped\""));
            }
        }
        if let Some(b) = &cfg.billiard {
            check_axes("billiard.axes", &b.axes)?;
            check_finite("billiard.sigma", &[b.sigma])?;
            check_finite("billiard.mu", &b.mu)?;
        }
        let i = &cfg.integrator;
        if !(i.h > 0.0 && i.h.is_finite()) {
            return Err(config_error("integrator.h", "must be positive"));
        }
        if !i.t.is_finite() {
            return Err(config_error("integrator.t", "must be finite"));
        }
        for (k, v) in &cfg.tolerances {
            if !default_tolerances().contains_key(k) {
                return Err(config_error(&format!("tolerances.{k}"), "unknown tolerance"));
            }
            check_finite(&format!("tolerances.{k}"), &[*v])?;
        }
        Ok(cfg)
    }

    /// Defaults, then config entries, then command-line overrides.
    pub fn tolerances(&self, overrides: &[(String, f64)]) -> Result<BTreeMap<String, f64>, CliError> {
        let mut t = default_tolerances();
        for (k, v) in self.tolerances.iter().map(|(k, v)| (k.clone(), *v)).chain(overrides.iter().cloned()) {
            if !t.contains_key(&k) {
                return Err(config_error(&format!("tol-overrides.{k}"), "unknown tolerance"));
            }
            t.insert(k, v);
        }
        Ok(t)
    }

    pub fn system_spec(&self) -> Result<SystemSpec, CliError> {
        let s = self.system.as_ref().ok_or_else(|| config_error("system", "missing section"))?;
        let kind: SystemKind = s.kind.parse().map_err(|e| config_error("system.kind", e))?;
        let spec = EllipsoidSpec::new(s.axes.clone()).map_err(|e| config_error("system.axes", e))?;
        let sys = match kind {
            SystemKind::Jacobi => SystemSpec::jacobi(spec, s.sigma),
            SystemKind::DoubleJacobi => SystemSpec::double_jacobi(spec, s.sigma),
            SystemKind::ComplexJacobi => SystemSpec::complex_jacobi(spec, s.sigma),
            SystemKind::JacobiRosochatius => SystemSpec::jacobi_rosochatius(spec, s.sigma, s.mu.clone()),
            SystemKind::SeparableHierarchy => SystemSpec::separable(spec, s.sigmas.clone(), s.mu.clone()),
            SystemKind::FreeOscillator => SystemSpec::free_oscillator(spec, s.sigma),
            SystemKind::FreeJR => SystemSpec::free_jr(spec, s.sigma, s.mu.clone()),
        }
        .map_err(|e| config_error("system", e))?;
        Ok(sys.with_ctol(s.ctol.unwrap_or(DEFAULT_CTOL)))
    }

    pub fn billiard_spec(&self) -> Result<BilliardSpec, CliError> {
        let b = self.billiard.as_ref().ok_or_else(|| config_error("billiard", "missing section"))?;
        let spec = BilliardSpec::new(b.axes.clone(), b.sigma, b.mu.clone()).map_err(|e| config_error("billiard", e))?;
        Ok(match b.epsilon {
            Some(eps) => spec.with_epsilon(eps),
            None => spec,
        })
    }
}

fn check_finite(field: &str, v: &[f64]) -> Result<(), CliError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(config_error(&format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn check_axes(field: &str, axes: &[f64]) -> Result<(), CliError> {
    if axes.is_empty() {
        return Err(config_error(field, "must not be empty"));
    }
    match axes.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
        Some(i) => Err(config_error(&format!("{field}[{i}]"), format!("must be positive, got {}", axes[i]))),
        None => Ok(()),
    }
}
