//! Run configuration: TOML in, canonical JSON mirror out, and a content hash
//! that names the output directory of a run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::StepConfig;
use crate::discretization::{Grid, DEFAULT_POINTS, DEFAULT_RADIUS};
use crate::dynamics::KineticSymbol;
use crate::error::{Error, Result};
use crate::model::PrototypeParams;
use crate::stationary::NewtonConfig;
use crate::waveguide::WaveguideParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub radius: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            points: DEFAULT_POINTS,
        }
    }
}

/// Frequencies are given as fractions of `lambda_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(flatten)]
    pub step: StepConfig,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            lambda_min: 0.05,
            lambda_max: 0.95,
            step: StepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Fraction of `lambda_inf`.
    pub lambda: f64,
    /// Number of randomized initial guesses in the uniqueness probe.
    pub probes: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { lambda: 0.5, probes: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub t_final: f64,
    pub dt: f64,
    pub delta: f64,
    pub sample_interval: f64,
    /// Fractions of `lambda_inf`; the nearest traced points are used.
    pub lambdas: Vec<f64>,
    pub symbol: KineticSymbol,
    /// Regression bound on `max distance / (delta |u|_{H1})`.
    pub excursion_factor: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            t_final: 50.0,
            dt: 1e-3,
            delta: 1e-3,
            sample_interval: 0.1,
            lambdas: vec![0.3, 0.5, 0.8],
            symbol: KineticSymbol::FiniteDifference,
            excursion_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: PrototypeParams,
    pub grid: GridConfig,
    pub newton: NewtonConfig,
    pub solve: SolveConfig,
    pub trace: TraceConfig,
    pub dynamics: DynamicsConfig,
    pub waveguide: WaveguideParams,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Every module-level invariant that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.build_grid()?;
        self.waveguide.validate()?;
        let t = &self.trace;
        if !(0.0 < t.lambda_min && t.lambda_min < t.lambda_max && t.lambda_max < 1.0) {
            return Err(Error::Config(format!(
                "trace window fractions must satisfy 0 < lambda_min < lambda_max < 1, got ({}, {})",
                t.lambda_min, t.lambda_max
            )));
        }
        if t.step.points < 2 {
            return Err(Error::Config("trace needs at least 2 points".into()));
        }
        if !(0.0 < self.solve.lambda && self.solve.lambda < 1.0) {
            return Err(Error::Config(format!(
                "solve.lambda is a fraction of lambda_inf in (0, 1), got {}",
                self.solve.lambda
            )));
        }
        let d = &self.dynamics;
        let positive = [
            ("dynamics.t_final", d.t_final),
            ("dynamics.dt", d.dt),
            ("dynamics.delta", d.delta),
            ("dynamics.sample_interval", d.sample_interval),
            ("newton.tol", self.newton.tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint: "(> 0)",
                });
            }
        }
        if d.lambdas.iter().any(|l| !(0.0 < *l && *l < 1.0)) {
            return Err(Error::Config(
                "dynamics.lambdas are fractions of lambda_inf in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.radius, self.grid.points)
    }

    /// Canonical JSON; field order is fixed by the struct definitions.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_json()).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// First 16 hex digits of [`RunConfig::hash`], used as directory name.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.trace.step.points, 60);
    }

    #[test]
    fn partial_tables_merge_with_defaults() {
        let c = RunConfig::from_toml("seed = 3\n[model]\nb = 0.3\n[trace]\npoints = 10\n").unwrap();
        assert_eq!(c.model.b, 0.3);
        assert_eq!(c.model.alpha, 1.0);
        assert_eq!(c.trace.step.points, 10);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn invalid_parameters_name_the_constraint() {
        let e = RunConfig::from_toml("[model]\nb = 1.2\n").unwrap_err().to_string();
        assert!(e.contains("(b ∈ (0,1))"), "{e}");
        let e = RunConfig::from_toml("[model]\nb = 0.5\nalpha = 1.6\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("α < 2 − b"), "{e}");
        assert!(RunConfig::from_toml("[grid]\npoints = 4000\n").is_err());
        assert!(RunConfig::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.short_hash().len(), 16);
    }
}
