//! Minibatch SGD with validation-loss early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{loss, Batch, Gradients, NetworkModel, OutputHead};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without a new best validation loss before training halts.
    pub patience: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 50,
            learning_rate: 0.05,
            max_epochs: 200,
            patience: 5,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    /// Defaults with the learning rate used for the given head (0.05 classification,
    /// 0.01 regression).
    pub fn for_head(head: OutputHead) -> Self {
        let learning_rate = match head {
            OutputHead::SoftmaxCrossEntropy => 0.05,
            OutputHead::IdentitySquaredError => 0.01,
        };
        Self {
            learning_rate,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, shuffle_seed: u64) -> Self {
        self.shuffle_seed = shuffle_seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be a positive number".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config("max_epochs and patience must be positive".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience ({}) exceeds max_epochs ({})",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean of the minibatch losses seen during the epoch.
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Snapshot with the lowest validation loss.
    pub model: NetworkModel,
    pub history: Vec<EpochLoss>,
    /// Epoch of the returned snapshot; 0 means the starting weights were never beaten.
    pub best_epoch: usize,
    pub best_validation_loss: f64,
}

/// Trains `model` on `train_set`, monitoring `validation` after every epoch.
///
/// The starting weights count as epoch 0, so a warm-started model is never
/// returned in a worse state than it arrived in.
pub fn train(
    model: NetworkModel,
    train_set: &Batch,
    validation: &Batch,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || validation.is_empty() {
        return Err(Error::Config("training and validation splits must be non-empty".into()));
    }
    if cfg.batch_size > train_set.len() {
        return Err(Error::Config(format!(
            "batch_size {} exceeds training-set size {}",
            cfg.batch_size,
            train_set.len()
        )));
    }
    for (name, set) in [("training", train_set), ("validation", validation)] {
        if set.inputs().ncols() != model.input_dim() {
            return Err(Error::shape("training input width", model.input_dim(), set.inputs().ncols()));
        }
        if set.targets().ncols() != model.output_dim() {
            return Err(Error::Config(format!(
                "{name} targets have {} columns, model has {} outputs",
                set.targets().ncols(),
                model.output_dim()
            )));
        }
    }

    let head = model.output_head();
    let validation_loss = |m: &NetworkModel| -> Result<f64> {
        let out = m.forward(validation.inputs())?;
        loss(out.view(), validation.targets(), head)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut grads = Gradients::zeros_like(&model);

    let mut best_validation_loss = validation_loss(&model)?;
    if !best_validation_loss.is_finite() {
        return Err(Error::Divergence {
            epoch: 0,
            loss: best_validation_loss,
        });
    }
    let mut best = model.clone();
    let mut best_epoch = 0;
    let mut current = model;
    let mut history = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut n_batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = train_set.select_rows(chunk);
            let batch_loss = current.loss_and_gradients(&batch, &mut grads);
            if !batch_loss.is_finite() {
                return Err(Error::Divergence { epoch, loss: batch_loss });
            }
            current.sgd_step(&grads, cfg.learning_rate);
            loss_sum += batch_loss;
            n_batches += 1;
        }
        let train_loss = loss_sum / n_batches as f64;
        if !current.is_finite() {
            return Err(Error::Divergence { epoch, loss: train_loss });
        }
        let val = validation_loss(&current)?;
        if !val.is_finite() {
            return Err(Error::Divergence { epoch, loss: val });
        }
        history.push(EpochLoss {
            epoch,
            train_loss,
            validation_loss: val,
        });
        if val < best_validation_loss {
            best_validation_loss = val;
            best = current.clone();
            best_epoch = epoch;
        } else if epoch - best_epoch >= cfg.patience {
            break;
        }
    }

    Ok(TrainOutcome {
        model: best,
        history,
        best_epoch,
        best_validation_loss,
    })
}
