//! Temporal knowledge-graph embeddings with time-evolving diagonal Gaussians.
//!
//! Entities and relations are Gaussians whose means follow an additive time
//! series (base + linear trend + sinusoidal seasonality) and whose diagonal
//! variances absorb the irregular component. Facts are scored by a
//! KL-divergence between the subject-minus-object distribution and the
//! relation distribution.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`data`]: fact-file parsing, time discretization, vocabularies, bundles
//! - [`model`]: parameters, scores and analytic gradients
//! - [`train`]: negative sampling, loss, Adam, training loop, checkpoints
//! - [`eval`]: time-wise filtered ranking, MRR and Hits@k

pub mod container;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod rng;
pub mod synthetic;
pub mod train;

pub use data::{DatasetBundle, IntervalFact, Quadruple, RawFact, Split, Timeline, TimelineSpec, Vocabulary};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalOptions, FilterIndex, Metrics};
pub use model::{GaussianEmbed, Model, ModelConfig, ModelParams, NormalizedTime, Variant};
pub use train::{train, Checkpoint, TrainConfig, Trainer};
