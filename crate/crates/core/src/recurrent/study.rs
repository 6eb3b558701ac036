use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::Examples;
use super::train::{predict_all, train_on_split, validation_split, ModelSpec, TrainSpec};
use super::RecurrentError;
use crate::corpus::Label;
use crate::harness::metrics::{accuracy, macro_f1};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Test-set predictions; kept in memory only.
    #[serde(skip)]
    pub predictions: Vec<Label>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Summary {
    /// Statistics over `values`, independent of their order: values are
    /// sorted before summation.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Summary {
            mean,
            max: sorted[sorted.len() - 1],
            min: sorted[0],
            std: var.sqrt(),
        })
    }
}

/// Repeated training under different seeds with one fixed train/validation
/// split; serializes to the distribution file used for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStudy {
    pub model: ModelSpec,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedRun>,
    /// Macro-F1 summary on the test set.
    pub summary: Summary,
    pub accuracy_summary: Summary,
}

/// Train one model per seed (in parallel) and score each on `test`.
pub fn seed_study(
    model: &ModelSpec,
    train_data: &dyn Examples,
    test_data: &dyn Examples,
    spec: &TrainSpec,
    seeds: &[u64],
) -> Result<SeedStudy, RecurrentError> {
    if seeds.is_empty() {
        return Err(RecurrentError::Config("seed list is empty".into()));
    }
    if test_data.is_empty() {
        return Err(RecurrentError::Config("test set is empty".into()));
    }
    spec.validate()?;
    let (train_idx, val_idx) = validation_split(&train_data.labels(), spec)?;
    let gold = test_data.labels();
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&seed| {
            let run_spec = TrainSpec { seed, ..spec.clone() };
            let (params, history) = train_on_split(model, train_data, &train_idx, &val_idx, &run_spec)?;
            let predictions = predict_all(&params, test_data)?;
            Ok(SeedRun {
                seed,
                macro_f1: macro_f1(&predictions, &gold)?,
                accuracy: accuracy(&predictions, &gold)?,
                best_epoch: history.best_epoch,
                epochs_run: history.epochs.len(),
                predictions,
            })
        })
        .collect::<Result<_, RecurrentError>>()?;
    let f1: Vec<f64> = runs.iter().map(|r| r.macro_f1).collect();
    let acc: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    Ok(SeedStudy {
        model: *model,
        seeds: seeds.to_vec(),
        summary: Summary::of(&f1).expect("non-empty"),
        accuracy_summary: Summary::of(&acc).expect("non-empty"),
        runs,
    })
}
