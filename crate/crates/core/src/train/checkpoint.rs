//! Checkpoint persistence.
//!
//! The container payload is
//!
//! ```text
//! u64 LE   header length h
//! h bytes  JSON header: configs, epoch, validation state, RNG positions,
//!          vocabulary digest, table shapes
//! rest     f64 LE tables, in order: params, Adam first moments, Adam second
//!          moments; each as entities then relations; each table as the
//!          families base, alpha, direction, amplitude, frequency, variance
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::TrainConfig;
use crate::container::{self, Kind};
use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{Family, Model, ModelConfig, ModelParams, ParamTable};
use crate::rng::RngState;

const CHECKPOINT: Kind = Kind {
    name: "checkpoint",
    magic: *b"ATISECKP",
    version: 1,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainerRngs {
    pub sampling: RngState,
    pub shuffle: RngState,
    pub repair: RngState,
}

/// Everything needed to resume training or evaluate a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub train_config: TrainConfig,
    pub adam: AdamState,
    pub epoch: usize,
    pub best_valid_mrr: Option<f64>,
    pub stale_validations: usize,
    pub rngs: TrainerRngs,
    pub vocab_digest: String,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model_config: ModelConfig,
    train_config: TrainConfig,
    epoch: usize,
    best_valid_mrr: Option<f64>,
    stale_validations: usize,
    rngs: TrainerRngs,
    vocab_digest: String,
    adam_step: u64,
    adam_beta1: f64,
    adam_beta2: f64,
    adam_epsilon: f64,
}

fn put_table(out: &mut Vec<u8>, t: &ParamTable) {
    for f in Family::ALL {
        for x in t.family(f) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
}

fn take_table(bytes: &mut &[u8], rows: usize, dim: usize) -> Result<ParamTable> {
    let mut t = ParamTable::zeros(rows, dim);
    for f in Family::ALL {
        let dst = t.family_mut(f);
        let need = dst.len() * 8;
        if bytes.len() < need {
            return Err(Error::Corrupt {
                kind: CHECKPOINT.name,
                message: "parameter tables truncated".into(),
            });
        }
        let (head, rest) = bytes.split_at(need);
        for (x, chunk) in dst.iter_mut().zip(head.chunks_exact(8)) {
            *x = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        *bytes = rest;
    }
    Ok(t)
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            model_config: self.model.config.clone(),
            train_config: self.train_config.clone(),
            epoch: self.epoch,
            best_valid_mrr: self.best_valid_mrr,
            stale_validations: self.stale_validations,
            rngs: self.rngs,
            vocab_digest: self.vocab_digest.clone(),
            adam_step: self.adam.step,
            adam_beta1: self.adam.beta1,
            adam_beta2: self.adam.beta2,
            adam_epsilon: self.adam.epsilon,
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut payload = Vec::new();
        payload.extend_from_slice(&(json.len() as u64).to_le_bytes());
        payload.extend_from_slice(&json);
        for p in [&self.model.params, &self.adam.first, &self.adam.second] {
            put_table(&mut payload, &p.entities);
            put_table(&mut payload, &p.relations);
        }
        container::encode(&CHECKPOINT, &payload)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: String| Error::Corrupt {
            kind: CHECKPOINT.name,
            message: m,
        };
        let mut payload = container::decode(&CHECKPOINT, bytes)?;
        if payload.len() < 8 {
            return Err(corrupt("missing header".into()));
        }
        let h_len = u64::from_le_bytes(payload[..8].try_into().unwrap()) as usize;
        payload = &payload[8..];
        if payload.len() < h_len {
            return Err(corrupt("header truncated".into()));
        }
        let header: Header = serde_json::from_slice(&payload[..h_len]).map_err(|e| corrupt(e.to_string()))?;
        payload = &payload[h_len..];
        let cfg = &header.model_config;
        cfg.validate()?;
        let mut read_params = || -> Result<ModelParams> {
            Ok(ModelParams {
                entities: take_table(&mut payload, cfg.n_entities, cfg.dim)?,
                relations: take_table(&mut payload, cfg.n_relations, cfg.dim)?,
            })
        };
        let params = read_params()?;
        let first = read_params()?;
        let second = read_params()?;
        if !payload.is_empty() {
            return Err(corrupt(format!("{} trailing bytes", payload.len())));
        }
        Ok(Checkpoint {
            model: Model {
                config: header.model_config,
                params,
            },
            train_config: header.train_config,
            adam: AdamState {
                first,
                second,
                step: header.adam_step,
                beta1: header.adam_beta1,
                beta2: header.adam_beta2,
                epsilon: header.adam_epsilon,
            },
            epoch: header.epoch,
            best_valid_mrr: header.best_valid_mrr,
            stale_validations: header.stale_validations,
            rngs: header.rngs,
            vocab_digest: header.vocab_digest,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        container::atomic_write(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&container::read(path)?)
    }

    /// Loads and checks the checkpoint against a vocabulary and, optionally,
    /// an expected embedding dimension.
    pub fn load_for(path: &Path, vocab: &Vocabulary, dim: Option<usize>) -> Result<Self> {
        let ckpt = Self::load(path)?;
        ckpt.ensure_compatible(vocab, dim)?;
        Ok(ckpt)
    }

    pub fn ensure_compatible(&self, vocab: &Vocabulary, dim: Option<usize>) -> Result<()> {
        let cfg = &self.model.config;
        if let Some(d) = dim {
            if d != cfg.dim {
                return Err(Error::Shape(format!("checkpoint has d = {}, expected {d}", cfg.dim)));
            }
        }
        if self.vocab_digest != vocab.digest() {
            return Err(Error::Shape("checkpoint was trained on a different vocabulary".into()));
        }
        let expected_rel = if self.train_config.reciprocal {
            2 * vocab.n_relations()
        } else {
            vocab.n_relations()
        };
        if cfg.n_entities != vocab.n_entities() || cfg.n_relations != expected_rel || cfg.n_steps != vocab.n_steps() {
            return Err(Error::Shape(format!(
                "checkpoint tables ({} entities, {} relations, {} steps) do not match the vocabulary",
                cfg.n_entities, cfg.n_relations, cfg.n_steps
            )));
        }
        Ok(())
    }
}
