use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_svm, LinearError, MaxMinScaler, SvmConfig};
use crate::corpus::Label;

/// Candidate C values tried when none are configured.
pub const DEFAULT_C_GRID: [f64; 7] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];

/// `(train, held_out)` index lists of one fold.
pub type Fold = (Vec<usize>, Vec<usize>);

/// Stratified k-fold assignment: each class is shuffled with `seed` and dealt
/// round-robin over the folds.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Fold>, LinearError> {
    if k < 2 {
        return Err(LinearError::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    for class in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(LinearError::ClassSmallerThanFolds {
                class,
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            fold_of[i] = j % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (held, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            (train, held)
        })
        .collect())
}

/// Result of training on one fold's training part and scoring its held-out part.
#[derive(Clone, Debug)]
pub struct FoldOutcome {
    pub accuracy: f64,
    /// Scaler fitted on the fold's training rows, when scaling is on.
    pub scaler: Option<MaxMinScaler>,
}

pub fn evaluate_fold(
    features: &[Vec<f64>],
    labels: &[Label],
    fold: &Fold,
    config: &SvmConfig,
    scale: bool,
) -> Result<FoldOutcome, LinearError> {
    let pick = |idx: &[usize]| -> Vec<Vec<f64>> { idx.iter().map(|&i| features[i].clone()).collect() };
    let mut train_x = pick(&fold.0);
    let mut test_x = pick(&fold.1);
    let train_y: Vec<Label> = fold.0.iter().map(|&i| labels[i]).collect();
    let scaler = if scale {
        let scaler = MaxMinScaler::fit(&train_x)?;
        train_x = scaler.transform(&train_x)?;
        test_x = scaler.transform(&test_x)?;
        Some(scaler)
    } else {
        None
    };
    let model = train_svm(&train_x, &train_y, config)?;
    let correct = fold
        .1
        .iter()
        .zip(&test_x)
        .filter(|(&i, x)| model.predict(x) == labels[i])
        .count();
    Ok(FoldOutcome {
        accuracy: correct as f64 / fold.1.len().max(1) as f64,
        scaler,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CScore {
    pub c_value: f64,
    pub mean_accuracy: f64,
    pub fold_accuracy: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSelection {
    pub best_c: f64,
    pub scores: Vec<CScore>,
}

/// Choose C by stratified k-fold cross-validation accuracy. The scaler is
/// refitted inside every fold on that fold's training rows only. Ties go to
/// the smaller C. `base` supplies tolerance, iteration cap and seed.
pub fn cv_select_c(
    features: &[Vec<f64>],
    labels: &[Label],
    grid: &[f64],
    k: usize,
    seed: u64,
    scale: bool,
    base: &SvmConfig,
) -> Result<CvSelection, LinearError> {
    let mut grid: Vec<f64> = grid.to_vec();
    if grid.is_empty() {
        return Err(LinearError::Config("empty C grid".into()));
    }
    if let Some(bad) = grid.iter().find(|c| c.is_nan() || **c <= 0.0) {
        return Err(LinearError::Config(format!("C must be positive, got {bad}")));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let folds = stratified_folds(labels, k, seed)?;
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|c| (0..k).map(move |f| (c, f))).collect();
    let results: Vec<Result<f64, LinearError>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let config = SvmConfig {
                c_value: grid[c],
                ..base.clone()
            };
            evaluate_fold(features, labels, &folds[f], &config, scale).map(|o| o.accuracy)
        })
        .collect();
    let mut scores: Vec<CScore> = grid
        .iter()
        .map(|&c_value| CScore {
            c_value,
            mean_accuracy: 0.0,
            fold_accuracy: Vec::with_capacity(k),
        })
        .collect();
    for (&(c, _), result) in jobs.iter().zip(results) {
        scores[c].fold_accuracy.push(result?);
    }
    for score in &mut scores {
        score.mean_accuracy = score.fold_accuracy.iter().sum::<f64>() / k as f64;
    }
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i].mean_accuracy > scores[best].mean_accuracy {
            best = i;
        }
    }
    Ok(CvSelection {
        best_c: scores[best].c_value,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified_and_disjoint() {
        let labels: Vec<Label> = (0..30).map(|i| Label::from_index(i % 3).unwrap()).collect();
        let folds = stratified_folds(&labels, 5, 1).unwrap();
        let mut seen = vec![0; labels.len()];
        for (train, held) in &folds {
            assert_eq!(train.len() + held.len(), labels.len());
            for class in Label::ALL {
                assert_eq!(held.iter().filter(|&&i| labels[i] == class).count(), 2);
            }
            for &i in held {
                seen[i] += 1;
                assert!(!train.contains(&i));
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn class_smaller_than_k() {
        let labels = vec![Label::Positive, Label::Positive, Label::Negative];
        assert!(matches!(
            stratified_folds(&labels, 2, 0),
            Err(LinearError::ClassSmallerThanFolds { class: Label::Negative, .. })
        ));
    }

    #[test]
    fn single_value_grid() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<Label> = (0..10).map(|i| if i < 5 { Label::Negative } else { Label::Positive }).collect();
        let sel = cv_select_c(&x, &y, &[0.3], 2, 0, true, &SvmConfig::default()).unwrap();
        assert_eq!(sel.best_c, 0.3);
        assert_eq!(sel.scores.len(), 1);
    }
}
