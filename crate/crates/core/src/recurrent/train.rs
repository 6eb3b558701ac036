use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Examples;
use super::model::{loss_and_gradients, predict};
use super::params::{LstmParams, INIT_RANGE};
use super::{Architecture, RecurrentError};
use crate::corpus::{stratified_partition, Label};

/// Seed of the train/validation split, shared by every model seed so a seed
/// study varies only the initialization and example order.
pub const DEFAULT_VALIDATION_SEED: u64 = 1234;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSpec {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    /// Initialization and shuffling seed.
    pub seed: u64,
    pub validation_fraction: f64,
    pub validation_seed: u64,
    /// Steps per side; `None` derives it from the longest training sequence.
    pub pad_length: Option<usize>,
    /// Hidden width; `None` uses the embedding width.
    pub hidden_dim: Option<usize>,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            learning_rate: 0.01,
            max_epochs: 300,
            patience: 10,
            seed: 0,
            validation_fraction: 0.2,
            validation_seed: DEFAULT_VALIDATION_SEED,
            pad_length: None,
            hidden_dim: None,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<(), RecurrentError> {
        let bad = |m: String| Err(RecurrentError::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.patience >= self.max_epochs {
            return bad(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            ));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!("validation fraction {} not in (0, 1)", self.validation_fraction));
        }
        Ok(())
    }
}

/// Architecture and layer widths of a model to train.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: Architecture,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's training examples.
    pub train_loss: f64,
    pub validation_accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Improved,
    Continue,
    Stop,
}

/// Patience counter over a score that should increase.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    waited: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::NEG_INFINITY,
            waited: 0,
        }
    }

    /// Only a strictly higher score counts as an improvement.
    pub fn observe(&mut self, score: f64) -> Verdict {
        if score > self.best {
            self.best = score;
            self.waited = 0;
            Verdict::Improved
        } else {
            self.waited += 1;
            if self.waited >= self.patience {
                Verdict::Stop
            } else {
                Verdict::Continue
            }
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }
}

/// The fixed stratified train/validation partition of `labels`.
pub fn validation_split(labels: &[Label], spec: &TrainSpec) -> Result<(Vec<usize>, Vec<usize>), RecurrentError> {
    stratified_partition(labels, spec.validation_fraction, spec.validation_seed).map_err(RecurrentError::from)
}

pub fn predict_indices(
    params: &LstmParams,
    data: &dyn Examples,
    indices: &[usize],
) -> Result<Vec<Label>, RecurrentError> {
    indices.iter().map(|&i| predict(params, &data.input(i)?)).collect()
}

pub fn predict_all(params: &LstmParams, data: &dyn Examples) -> Result<Vec<Label>, RecurrentError> {
    let all: Vec<usize> = (0..data.len()).collect();
    predict_indices(params, data, &all)
}

/// Train on a stratified split of `data`, keeping the parameters of the
/// epoch with the best validation accuracy.
pub fn train(model: &ModelSpec, data: &dyn Examples, spec: &TrainSpec) -> Result<(LstmParams, History), RecurrentError> {
    spec.validate()?;
    let (train_idx, val_idx) = validation_split(&data.labels(), spec)?;
    train_on_split(model, data, &train_idx, &val_idx, spec)
}

/// Plain SGD with batch size 1 and cross-entropy loss; examples are visited
/// in a fresh seeded order each epoch.
pub fn train_on_split(
    model: &ModelSpec,
    data: &dyn Examples,
    train_idx: &[usize],
    val_idx: &[usize],
    spec: &TrainSpec,
) -> Result<(LstmParams, History), RecurrentError> {
    spec.validate()?;
    if train_idx.is_empty() || val_idx.is_empty() {
        return Err(RecurrentError::Config("training and validation sets must be non-empty".into()));
    }
    let mut params = LstmParams::init(model.arch, model.input_dim, model.hidden_dim, spec.seed, INIT_RANGE);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let mut order = train_idx.to_vec();
    let mut stopper = EarlyStopping::new(spec.patience);
    let mut best = params.clone();
    let mut history = History::default();
    let val_gold: Vec<Label> = val_idx.iter().map(|&i| data.label(i)).collect();

    for epoch in 1..=spec.max_epochs {
        order.shuffle(&mut rng);
        let mut total_loss = 0.0;
        for &i in &order {
            let (loss, grads) = loss_and_gradients(&params, &data.input(i)?, data.label(i))?;
            total_loss += loss;
            params.sgd_step(&grads, spec.learning_rate);
        }
        if !params.is_finite() {
            return Err(RecurrentError::Diverged { epoch });
        }
        let predictions = predict_indices(&params, data, val_idx)?;
        let correct = predictions.iter().zip(&val_gold).filter(|(p, g)| p == g).count();
        let validation_accuracy = correct as f64 / val_gold.len() as f64;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: total_loss / order.len() as f64,
            validation_accuracy,
        });
        log::debug!("epoch {epoch}: loss {:.5} val acc {validation_accuracy:.4}", total_loss / order.len() as f64);
        match stopper.observe(validation_accuracy) {
            Verdict::Improved => {
                best = params.clone();
                history.best_epoch = epoch;
            }
            Verdict::Continue => {}
            Verdict::Stop => {
                history.stopped_early = true;
                break;
            }
        }
    }
    Ok((best, history))
}
