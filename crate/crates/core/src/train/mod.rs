//! Training: negative sampling, self-adversarial loss, Adam, constraint
//! projection, early stopping on validation MRR, and checkpoints.

mod adam;
mod checkpoint;
mod loss;
mod sampling;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{Checkpoint, TrainerRngs};
pub use loss::{adversarial_weights, batch_loss, neg_log_sigmoid, positive_loss, sigmoid};
pub use sampling::{add_reciprocal, sample_negatives};

use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DatasetBundle, Quadruple};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalOptions, FilterIndex};
use crate::model::{Model, ModelConfig};
use crate::rng::{stream_rng, RngState, Stream};

/// Hard cap on training length.
pub const MAX_EPOCHS_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    /// Negatives per positive.
    pub negatives: usize,
    pub margin: f64,
    /// Self-adversarial temperature; 0 gives uniform negative weights.
    pub adv_temp: f64,
    pub max_epochs: usize,
    /// Validations without improvement before stopping.
    pub patience: usize,
    pub eval_every: usize,
    pub seed: u64,
    pub reciprocal: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 3e-5,
            batch_size: 512,
            negatives: 10,
            margin: 1.0,
            adv_temp: 1.0,
            max_epochs: MAX_EPOCHS_CAP,
            patience: 20,
            eval_every: 25,
            seed: 0,
            reciprocal: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives per positive must be at least 1");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad("margin must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.adv_temp >= 0.0 && self.adv_temp.is_finite()) {
            return bad("adversarial temperature must be non-negative");
        }
        if self.eval_every == 0 {
            return bad("eval_every must be at least 1");
        }
        if self.max_epochs > MAX_EPOCHS_CAP {
            return Err(Error::Config(format!("max_epochs is capped at {MAX_EPOCHS_CAP}")));
        }
        Ok(())
    }
}

/// One validation record.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLine {
    pub epoch: usize,
    /// Mean loss per positive over the last epoch.
    pub loss: f64,
    pub valid_mrr: f64,
    pub wall_seconds: f64,
}

impl LogLine {
    pub fn to_tsv(&self) -> String {
        format!("{}\t{:.6}\t{:.6}\t{:.3}", self.epoch, self.loss, self.valid_mrr, self.wall_seconds)
    }
}

/// Stateful training loop over one dataset bundle.
pub struct Trainer<'a> {
    bundle: &'a DatasetBundle,
    quads: Vec<Quadruple>,
    filter: FilterIndex,
    pub model: Model,
    pub config: TrainConfig,
    adam: AdamState,
    epoch: usize,
    sampling: ChaCha8Rng,
    shuffle: ChaCha8Rng,
    repair: ChaCha8Rng,
    best_valid_mrr: Option<f64>,
    stale: usize,
    best: Option<Checkpoint>,
    last_loss: f64,
    started: Instant,
}

/// Model dimensions implied by a bundle and the training configuration.
pub fn model_config_for(bundle: &DatasetBundle, base: &ModelConfig, reciprocal: bool) -> ModelConfig {
    let v = &bundle.vocabulary;
    ModelConfig {
        n_entities: v.n_entities(),
        n_relations: if reciprocal { 2 * v.n_relations() } else { v.n_relations() },
        n_steps: v.n_steps(),
        ..base.clone()
    }
}

fn training_quads(bundle: &DatasetBundle, reciprocal: bool) -> Result<Vec<Quadruple>> {
    if bundle.train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    let facts = if reciprocal {
        let flagged = DatasetBundle {
            vocabulary: bundle.vocabulary.with_reciprocal(true),
            ..bundle.clone()
        };
        add_reciprocal(&flagged)?.train
    } else {
        bundle.train.clone()
    };
    Ok(facts.iter().flat_map(|f| f.expand()).collect())
}

impl<'a> Trainer<'a> {
    /// Starts from freshly initialized parameters. Table sizes in
    /// `model_config` are overwritten from the bundle.
    pub fn new(bundle: &'a DatasetBundle, model_config: &ModelConfig, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let model_config = model_config_for(bundle, model_config, config.reciprocal);
        let mut model = Model::init(model_config, config.seed)?;
        let quads = training_quads(bundle, config.reciprocal)?;
        let mut repair = stream_rng(config.seed, Stream::Repair);
        model.params.project_constraints(&model.config, &mut repair);
        Ok(Trainer {
            bundle,
            quads,
            filter: FilterIndex::build(bundle),
            adam: AdamState::new(&model.config),
            sampling: stream_rng(config.seed, Stream::Sampling),
            shuffle: stream_rng(config.seed, Stream::Shuffle),
            repair,
            model,
            config,
            epoch: 0,
            best_valid_mrr: None,
            stale: 0,
            best: None,
            last_loss: f64::NAN,
            started: Instant::now(),
        })
    }

    /// Continues from a saved state.
    pub fn resume(bundle: &'a DatasetBundle, ckpt: Checkpoint) -> Result<Self> {
        ckpt.train_config.validate()?;
        ckpt.ensure_compatible(&bundle.vocabulary, None)?;
        let quads = training_quads(bundle, ckpt.train_config.reciprocal)?;
        Ok(Trainer {
            bundle,
            quads,
            filter: FilterIndex::build(bundle),
            adam: ckpt.adam,
            sampling: ckpt.rngs.sampling.restore(),
            shuffle: ckpt.rngs.shuffle.restore(),
            repair: ckpt.rngs.repair.restore(),
            model: ckpt.model,
            config: ckpt.train_config,
            epoch: ckpt.epoch,
            best_valid_mrr: ckpt.best_valid_mrr,
            stale: ckpt.stale_validations,
            best: None,
            last_loss: f64::NAN,
            started: Instant::now(),
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    /// Number of expanded (and reciprocal-augmented) training quadruples.
    pub fn n_training_quads(&self) -> usize {
        self.quads.len()
    }

    /// Snapshot of the full training state.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            model: self.model.clone(),
            train_config: self.config.clone(),
            adam: self.adam.clone(),
            epoch: self.epoch,
            best_valid_mrr: self.best_valid_mrr,
            stale_validations: self.stale,
            rngs: TrainerRngs {
                sampling: RngState::capture(&self.sampling),
                shuffle: RngState::capture(&self.shuffle),
                repair: RngState::capture(&self.repair),
            },
            vocab_digest: self.bundle.vocabulary.digest(),
        }
    }

    /// One optimizer iteration on a minibatch. Returns the summed loss.
    pub fn step(&mut self, batch: &[Quadruple]) -> f64 {
        let negatives = sample_negatives(batch, self.config.negatives, self.model.config.n_entities, &mut self.sampling);
        let (loss, grads) = batch_loss(&self.model, batch, &negatives, self.config.margin, self.config.adv_temp);
        adam_step(&mut self.model.params, &grads, &mut self.adam, self.config.lr);
        // Unit norms and variance bounds, restored on every row the update
        // touched; all other rows are unchanged and still feasible.
        let ents: Vec<usize> = grads.entities.keys().copied().collect();
        let rels: Vec<usize> = grads.relations.keys().copied().collect();
        self.model
            .params
            .project_rows(&self.model.config, &ents, &rels, &mut self.repair);
        loss
    }

    /// One shuffled pass over the training quadruples. Returns the mean loss
    /// per positive.
    pub fn run_epoch(&mut self) -> f64 {
        let mut order: Vec<usize> = (0..self.quads.len()).collect();
        order.shuffle(&mut self.shuffle);
        let mut total = 0.0;
        let mut batch = Vec::with_capacity(self.config.batch_size);
        for chunk in order.chunks(self.config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| self.quads[i]));
            total += self.step(&batch);
        }
        self.epoch += 1;
        self.last_loss = total / self.quads.len() as f64;
        self.last_loss
    }

    pub fn validation_mrr(&self) -> Result<f64> {
        let opts = EvalOptions {
            filtered: true,
            reciprocal: self.config.reciprocal,
        };
        Ok(evaluate(&self.model, &self.bundle.valid, &self.filter, opts)?.metrics.mrr)
    }

    fn validate_and_track(&mut self) -> Result<LogLine> {
        let mrr = self.validation_mrr()?;
        if self.best_valid_mrr.is_none_or(|b| mrr > b) {
            self.best_valid_mrr = Some(mrr);
            self.stale = 0;
            self.best = Some(self.checkpoint());
        } else {
            self.stale += 1;
        }
        Ok(LogLine {
            epoch: self.epoch,
            loss: self.last_loss,
            valid_mrr: mrr,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        })
    }

    /// Trains until `max_epochs` or until `patience` validations pass
    /// without improvement, then returns the best checkpoint. Without a
    /// validation split the final state is returned.
    pub fn fit<F: FnMut(&LogLine)>(self, on_validation: F) -> Result<Checkpoint> {
        Ok(self.fit_with_last(on_validation)?.0)
    }

    /// Like [`fit`](Self::fit), but also returns the state after the final
    /// epoch, which is what a resumed run should continue from.
    pub fn fit_with_last<F: FnMut(&LogLine)>(mut self, mut on_validation: F) -> Result<(Checkpoint, Checkpoint)> {
        let has_valid = !self.bundle.valid.is_empty();
        let mut validated_at = None;
        while self.epoch < self.config.max_epochs {
            self.run_epoch();
            if has_valid && self.epoch % self.config.eval_every == 0 {
                let line = self.validate_and_track()?;
                validated_at = Some(self.epoch);
                on_validation(&line);
                if self.stale >= self.config.patience.max(1) {
                    log::info!("early stop at epoch {} (best valid MRR {:?})", self.epoch, self.best_valid_mrr);
                    break;
                }
            }
        }
        if has_valid && self.epoch > 0 && validated_at != Some(self.epoch) {
            let line = self.validate_and_track()?;
            on_validation(&line);
        }
        let last = self.checkpoint();
        let best = self.best.take().unwrap_or_else(|| last.clone());
        Ok((best, last))
    }
}

/// Trains a model from scratch and returns the best checkpoint.
pub fn train(bundle: &DatasetBundle, model_config: &ModelConfig, config: TrainConfig) -> Result<Checkpoint> {
    Trainer::new(bundle, model_config, config)?.fit(|_| {})
}
