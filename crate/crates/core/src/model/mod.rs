//! Gaussian embeddings whose means evolve as additive time series.
//!
//! Every entity and relation carries a unit-norm base mean, a scalar trend
//! rate with a unit-norm trend direction, seasonal amplitude and frequency
//! vectors, and a diagonal variance. The mean at normalized time `t` is
//!
//! ```text
//! base + alpha * direction * t + amplitude ⊙ sin(2π · frequency · t)
//! ```
//!
//! with the trend or seasonal term dropped for the ablation variants.

mod grad;
mod params;
pub(crate) mod score;

pub use grad::{Gradients, RowGrad};
pub use params::{Family, ModelParams, ParamRef, ParamTable, TableKind};
pub use score::{kl_diag, sym_kl_diag, GaussianEmbed, ScoreKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Trend + seasonal + noise, symmetric-KL score.
    Full,
    /// Seasonal + noise (no trend).
    Sn,
    /// Trend + noise (no seasonal).
    Tn,
    /// Trend + seasonal, translational L2 score, no variances.
    Ts,
}

impl Variant {
    pub fn has_trend(self) -> bool {
        !matches!(self, Variant::Sn)
    }

    pub fn has_seasonal(self) -> bool {
        !matches!(self, Variant::Tn)
    }

    pub fn has_noise(self) -> bool {
        !matches!(self, Variant::Ts)
    }

    pub fn score_kind(self) -> ScoreKind {
        match self {
            Variant::Ts => ScoreKind::Translation,
            _ => ScoreKind::SymmetricKl,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Sn => "sn",
            Variant::Tn => "tn",
            Variant::Ts => "ts",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "atise" => Ok(Variant::Full),
            "sn" => Ok(Variant::Sn),
            "tn" => Ok(Variant::Tn),
            "ts" => Ok(Variant::Ts),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub variant: Variant,
    pub c_min: f64,
    pub c_max: f64,
    pub n_entities: usize,
    /// Includes inverse relations when reciprocal learning is on.
    pub n_relations: usize,
    /// Number of discrete time steps; step `k` maps to time `k / n_steps`.
    pub n_steps: usize,
}

/// Default hyperparameters; table sizes are left at zero and filled in from
/// a dataset.
impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 500,
            variant: Variant::Full,
            c_min: 0.005,
            c_max: 0.5,
            n_entities: 0,
            n_relations: 0,
            n_steps: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        if !(self.c_min > 0.0 && self.c_min < self.c_max && self.c_max.is_finite()) {
            return Err(Error::Config(format!(
                "covariance bounds must satisfy 0 < c_min < c_max, got ({}, {})",
                self.c_min, self.c_max
            )));
        }
        if self.n_entities == 0 || self.n_relations == 0 || self.n_steps == 0 {
            return Err(Error::Config("model tables must be non-empty".into()));
        }
        Ok(())
    }

    pub fn time(&self, step: usize) -> NormalizedTime {
        NormalizedTime::from_step(step, self.n_steps)
    }
}

/// Time rescaled to `[0, 1)`: `step / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedTime(f64);

impl NormalizedTime {
    pub fn from_step(step: usize, n_steps: usize) -> Self {
        NormalizedTime(step as f64 / n_steps as f64)
    }

    /// Any real value; used by tests and analysis that probe off-grid times.
    pub fn raw(value: f64) -> Self {
        NormalizedTime(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A configuration paired with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

impl Model {
    /// Initializes parameters deterministically from `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = crate::rng::stream_rng(seed, crate::rng::Stream::Init);
        let params = ModelParams::init(&config, &mut rng);
        Ok(Model { config, params })
    }
}
