//! Experiment configuration, read from TOML (canonical) or JSON.
//!
//! ```toml
//! experiment_name = "duality"
//! n_paths = 10000
//! grid_step = 1e-3
//! t = 1.0
//! seed = 7
//! functionals = ["EndpointValue", "SupValue", { ValueAtFraction = 0.5 }]
//!
//! [triplet]
//! drift = 0.0
//! gaussian = 0.5
//!
//! [triplet.jumps]
//! kind = "compound_poisson"
//! rate = 1.0
//! law = { kind = "double_exponential", p_up = 0.5, rate_up = 2.0, rate_down = 2.0 }
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path as FsPath;

use anyhow::{bail, Context, Result};
use levyx_core::{JumpLaw, JumpSpec, LevyTriplet};
use serde::{Deserialize, Serialize};

use crate::functional::FunctionalSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletConfig {
    /// The coefficient `a` of ψ; the paths move with velocity −a (plus small-jump
    /// compensation).
    pub drift: f64,
    /// The coefficient `b` of ψ; the Gaussian part has variance 2b per unit time.
    pub gaussian: f64,
    #[serde(default)]
    pub jumps: JumpsConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpsConfig {
    #[default]
    None,
    CompoundPoisson {
        rate: f64,
        law: LawConfig,
    },
    TruncatedStable {
        alpha: f64,
        skew: f64,
        eps: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawConfig {
    Dirac { at: f64 },
    Normal { mean: f64, sd: f64 },
    DoubleExponential { p_up: f64, rate_up: f64, rate_down: f64 },
    Uniform { low: f64, high: f64 },
}

impl TripletConfig {
    pub fn brownian(b: f64) -> Self {
        TripletConfig { drift: 0.0, gaussian: b, jumps: JumpsConfig::None }
    }

    pub fn to_triplet(&self) -> Result<LevyTriplet> {
        let jumps = match self.jumps {
            JumpsConfig::None => JumpSpec::None,
            JumpsConfig::CompoundPoisson { rate, law } => JumpSpec::CompoundPoisson {
                rate,
                law: match law {
                    LawConfig::Dirac { at } => JumpLaw::Dirac { at },
                    LawConfig::Normal { mean, sd } => JumpLaw::Normal { mean, sd },
                    LawConfig::DoubleExponential { p_up, rate_up, rate_down } => {
                        JumpLaw::DoubleExponential { p_up, rate_up, rate_down }
                    }
                    LawConfig::Uniform { low, high } => JumpLaw::Uniform { low, high },
                },
            },
            JumpsConfig::TruncatedStable { alpha, skew, eps } => JumpSpec::TruncatedStable { alpha, skew, eps },
        };
        Ok(LevyTriplet::new(self.drift, self.gaussian, jumps)?)
    }
}

/// Experiment name accepted by `levyx simulate` configs in place of a registered one.
pub const SIMULATE: &str = "simulate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_name: String,
    pub triplet: TripletConfig,
    pub n_paths: usize,
    pub grid_step: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
    /// Width of conditioning bands and density windows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Time cap for open-ended simulations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functionals: Vec<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("malformed TOML config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("malformed JSON config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; `.json` files are parsed as JSON, everything else as TOML.
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") { Self::from_json(&text) } else { Self::from_toml(&text) }
            .with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment_name != SIMULATE && !crate::experiments::is_registered(&self.experiment_name) {
            bail!("unknown experiment `{}`", self.experiment_name);
        }
        if self.n_paths < 100 {
            bail!("n_paths must be at least 100, got {}", self.n_paths);
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            bail!("grid_step must be positive, got {}", self.grid_step);
        }
        let positive = [
            ("horizon", self.horizon),
            ("alpha", self.alpha),
            ("x", self.x),
            ("t", self.t),
            ("delta", self.delta),
            ("cap", self.cap),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name} must be positive and finite, got {v}");
                }
            }
        }
        for f in &self.functionals {
            f.validate()?;
        }
        self.triplet.to_triplet()?;
        Ok(())
    }

    pub fn t_or(&self, default: f64) -> f64 {
        self.t.unwrap_or(default)
    }

    pub fn x_or(&self, default: f64) -> f64 {
        self.x.unwrap_or(default)
    }

    pub fn alpha_or(&self, default: f64) -> f64 {
        self.alpha.unwrap_or(default)
    }

    pub fn cap_or(&self, default: f64) -> f64 {
        self.cap.unwrap_or(default)
    }

    pub fn delta_or(&self, default: f64) -> f64 {
        self.delta.unwrap_or(default)
    }

    pub fn horizon_or(&self, default: f64) -> f64 {
        self.horizon.unwrap_or(default)
    }

    pub fn levels_or(&self, default: &[f64]) -> Vec<f64> {
        if self.levels.is_empty() {
            default.to_vec()
        } else {
            self.levels.clone()
        }
    }

    pub fn functionals_or(&self, default: &[FunctionalSpec]) -> Vec<FunctionalSpec> {
        if self.functionals.is_empty() {
            default.to_vec()
        } else {
            self.functionals.clone()
        }
    }
}
