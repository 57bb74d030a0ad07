//! Run configuration: defaults, JSON file loading, environment and flag
//! overrides, validation, and converters into the library parameter structs.
//!
//! Precedence (lowest to highest): built-in defaults, config file, the
//! `LANDAU_CACHE_DIR` / `LANDAU_OUT_DIR` environment variables (directories
//! only), command-line flags.

use std::path::{Path, PathBuf};

use landau_core::error::{LandauError, Result};
use landau_core::smoothing::SmoothingParams;
use landau_core::validate::ValidatorConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

fn d_schema() -> u32 {
    SCHEMA_VERSION
}
fn d_gamma() -> f64 {
    -1.0
}
fn d_seed() -> u64 {
    7_051_926
}
fn d_cap() -> usize {
    10
}
fn d_m_max() -> usize {
    4
}
fn d_horizon() -> f64 {
    2.0
}
fn d_t_min() -> f64 {
    1e-3
}
fn d_n_times() -> usize {
    14
}
fn d_grid_q() -> usize {
    24
}
fn d_cap_check() -> usize {
    20
}
fn d_grid_q_check() -> usize {
    34
}
fn d_resolve_tol() -> f64 {
    0.05
}
fn d_quad_tol() -> f64 {
    1e-12
}
fn d_max_panels() -> usize {
    2000
}
fn d_n_samples() -> usize {
    48
}
fn d_beta_max() -> usize {
    4
}
fn d_min_resolved() -> f64 {
    0.25
}

/// Complete, explicit configuration of one laboratory run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Config schema version; only version 1 is understood.
    #[serde(default = "d_schema")]
    pub schema_version: u32,
    /// Soft-potential exponent, in (-3, 0).
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    /// RNG seed for the rough datum and the validator samples.
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Spectral truncation degree D.
    #[serde(default = "d_cap")]
    pub cap: usize,
    /// Largest derivative order |α| probed by smoothing and validators.
    #[serde(default = "d_m_max")]
    pub m_max: usize,
    /// Evolution horizon T.
    #[serde(default = "d_horizon")]
    pub horizon: f64,
    /// First snapshot time of the geometric schedule.
    #[serde(default = "d_t_min")]
    pub t_min: f64,
    /// Number of geometric snapshot times.
    #[serde(default = "d_n_times")]
    pub n_times: usize,
    /// Axis quadrature size for the base grid.
    #[serde(default = "d_grid_q")]
    pub grid_q: usize,
    /// Doubled truncation used by the smoothing resolution check.
    #[serde(default = "d_cap_check")]
    pub cap_check: usize,
    /// Axis quadrature size for the resolution-check grid.
    #[serde(default = "d_grid_q_check")]
    pub grid_q_check: usize,
    /// Relative tail tolerance below which a smoothing cell is resolved.
    #[serde(default = "d_resolve_tol")]
    pub resolve_tol: f64,
    /// Absolute tolerance of the adaptive radial quadrature.
    #[serde(default = "d_quad_tol")]
    pub quad_tol: f64,
    /// Panel budget of the adaptive radial quadrature.
    #[serde(default = "d_max_panels")]
    pub max_panels: usize,
    /// Number of random samples per validated inequality.
    #[serde(default = "d_n_samples")]
    pub n_samples: usize,
    /// Largest coefficient-derivative order |β| probed.
    #[serde(default = "d_beta_max")]
    pub beta_max: usize,
    /// Smallest acceptable late-time resolved fraction before the smoothing
    /// command fails with a data-quality error.
    #[serde(default = "d_min_resolved")]
    pub min_resolved_fraction: f64,
    /// Directory for reusable caches (coefficient tables, operators).
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Directory for report artifacts; defaults to ./landau-out.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: d_schema(),
            gamma: d_gamma(),
            seed: d_seed(),
            cap: d_cap(),
            m_max: d_m_max(),
            horizon: d_horizon(),
            t_min: d_t_min(),
            n_times: d_n_times(),
            grid_q: d_grid_q(),
            cap_check: d_cap_check(),
            grid_q_check: d_grid_q_check(),
            resolve_tol: d_resolve_tol(),
            quad_tol: d_quad_tol(),
            max_panels: d_max_panels(),
            n_samples: d_n_samples(),
            beta_max: d_beta_max(),
            min_resolved_fraction: d_min_resolved(),
            cache_dir: None,
            out_dir: None,
        }
    }
}

/// Command-line overrides applied on top of file and environment values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub cap: Option<usize>,
    pub m_max: Option<usize>,
    pub horizon: Option<f64>,
    pub grid_q: Option<usize>,
    pub n_samples: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Load a JSON config file, or the defaults when `path` is `None`, then
    /// apply environment variables and flag overrides and validate.
    pub fn resolve(path: Option<&Path>, ov: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LandauError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| LandauError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if cfg.cache_dir.is_none() {
            if let Some(dir) = std::env::var_os("LANDAU_CACHE_DIR") {
                cfg.cache_dir = Some(PathBuf::from(dir));
            }
        }
        if cfg.out_dir.is_none() {
            if let Some(dir) = std::env::var_os("LANDAU_OUT_DIR") {
                cfg.out_dir = Some(PathBuf::from(dir));
            }
        }
        if let Some(g) = ov.gamma {
            cfg.gamma = g;
        }
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(c) = ov.cap {
            cfg.cap = c;
        }
        if let Some(m) = ov.m_max {
            cfg.m_max = m;
        }
        if let Some(t) = ov.horizon {
            cfg.horizon = t;
        }
        if let Some(q) = ov.grid_q {
            cfg.grid_q = q;
        }
        if let Some(n) = ov.n_samples {
            cfg.n_samples = n;
        }
        if let Some(d) = &ov.cache_dir {
            cfg.cache_dir = Some(d.clone());
        }
        if let Some(d) = &ov.out_dir {
            cfg.out_dir = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check every cross-field constraint; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LandauError::Config(format!(
                "unsupported schema_version {} (this binary understands {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(-3.0 < self.gamma && self.gamma < 0.0) {
            return Err(LandauError::GammaOutOfRange(self.gamma));
        }
        if self.m_max == 0 {
            return Err(LandauError::Config("m_max must be at least 1".into()));
        }
        if self.cap < self.m_max + 2 {
            return Err(LandauError::Config(format!(
                "cap must be at least m_max + 2 = {} so every probed derivative keeps degree headroom, got {}",
                self.m_max + 2,
                self.cap
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(LandauError::Config(format!(
                "horizon must be positive and finite, got {}",
                self.horizon
            )));
        }
        if !(self.t_min.is_finite() && self.t_min > 0.0 && self.t_min < self.horizon) {
            return Err(LandauError::Config(format!(
                "t_min must lie in (0, horizon), got {}",
                self.t_min
            )));
        }
        if self.n_times < 2 {
            return Err(LandauError::Config(format!(
                "n_times must be at least 2, got {}",
                self.n_times
            )));
        }
        if self.cap_check <= self.cap {
            return Err(LandauError::Config(format!(
                "cap_check must exceed cap ({}), got {}",
                self.cap, self.cap_check
            )));
        }
        if self.grid_q < self.cap + self.m_max + 2 {
            return Err(LandauError::Config(format!(
                "grid_q must be at least cap + m_max + 2 = {} to integrate degree-{} integrands, got {}",
                self.cap + self.m_max + 2,
                self.cap + self.m_max,
                self.grid_q
            )));
        }
        if self.grid_q_check < self.cap_check + self.m_max + 2 {
            return Err(LandauError::Config(format!(
                "grid_q_check must be at least cap_check + m_max + 2 = {}, got {}",
                self.cap_check + self.m_max + 2,
                self.grid_q_check
            )));
        }
        if !(self.resolve_tol > 0.0 && self.resolve_tol < 1.0) {
            return Err(LandauError::Config(format!(
                "resolve_tol must lie in (0, 1), got {}",
                self.resolve_tol
            )));
        }
        if !(self.quad_tol.is_finite() && self.quad_tol > 0.0) {
            return Err(LandauError::Config(format!(
                "quad_tol must be positive, got {}",
                self.quad_tol
            )));
        }
        if self.max_panels < 16 {
            return Err(LandauError::Config(format!(
                "max_panels must be at least 16, got {}",
                self.max_panels
            )));
        }
        if self.n_samples == 0 {
            return Err(LandauError::Config("n_samples must be at least 1".into()));
        }
        if self.beta_max == 0 {
            return Err(LandauError::Config("beta_max must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_resolved_fraction) {
            return Err(LandauError::Config(format!(
                "min_resolved_fraction must lie in [0, 1], got {}",
                self.min_resolved_fraction
            )));
        }
        Ok(())
    }

    /// Root of all written artifacts (per-γ subdirectories hang off it).
    pub fn out_root(&self) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("landau-out"))
    }

    /// Smoothing-protocol parameters for this configuration.
    pub fn smoothing_params(&self) -> SmoothingParams {
        SmoothingParams {
            gamma: self.gamma,
            cap_base: self.cap,
            cap_check: self.cap_check,
            m_max: self.m_max,
            seed: self.seed,
            t_min: self.t_min,
            t_max: self.horizon,
            n_times: self.n_times,
            resolve_tol: self.resolve_tol,
            grid_q_base: self.grid_q,
            grid_q_check: self.grid_q_check,
            quad_tol: self.quad_tol,
            max_panels: self.max_panels,
        }
    }

    /// Inequality-validator parameters for this configuration.
    pub fn validator_config(&self) -> ValidatorConfig {
        ValidatorConfig {
            gamma: self.gamma,
            cap: self.cap,
            grid_q: self.grid_q,
            seed: self.seed,
            n_samples: self.n_samples,
            beta_max: self.beta_max,
            m_max: self.m_max,
            thetas: vec![0.0, self.gamma / 2.0, self.gamma],
            quad_tol: self.quad_tol,
            max_panels: self.max_panels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn gamma_out_of_range_is_rejected_with_range_in_message() {
        let cfg = RunConfig {
            gamma: 0.5,
            ..RunConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(-3, 0)"), "message must name the range: {msg}");
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let err = serde_json::from_str::<RunConfig>(r#"{"gamma": -1.0, "bogus": 3}"#);
        assert!(err.is_err());
    }

    #[test]
    fn cross_field_constraints_are_enforced() {
        let bad = RunConfig {
            cap: 4,
            m_max: 4,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            cap_check: 10,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            grid_q: 10,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            t_min: 3.0,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn flag_overrides_beat_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"gamma": -2.0, "seed": 11}"#).unwrap();
        let ov = Overrides {
            gamma: Some(-0.5),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(Some(&path), &ov).unwrap();
        assert_eq!(cfg.gamma, -0.5);
        assert_eq!(cfg.seed, 11);
    }

    #[test]
    fn converters_carry_every_shared_field() {
        let cfg = RunConfig::default();
        let sp = cfg.smoothing_params();
        assert_eq!(sp.cap_base, cfg.cap);
        assert_eq!(sp.t_max, cfg.horizon);
        assert_eq!(sp.grid_q_base, cfg.grid_q);
        let vc = cfg.validator_config();
        assert_eq!(vc.cap, cfg.cap);
        assert_eq!(vc.thetas.len(), 3);
        assert_eq!(vc.thetas[2], cfg.gamma);
    }
}
