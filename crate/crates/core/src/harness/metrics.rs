use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("{predictions} predictions but {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("no predictions to score")]
    Empty,
}

fn check(predictions: &[Label], gold: &[Label]) -> Result<(), MetricError> {
    if predictions.len() != gold.len() {
        return Err(MetricError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn accuracy(predictions: &[Label], gold: &[Label]) -> Result<f64, MetricError> {
    check(predictions, gold)?;
    let correct = predictions.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / gold.len() as f64)
}

/// `matrix[gold][predicted]` counts in label order.
pub fn confusion_matrix(predictions: &[Label], gold: &[Label]) -> Result<[[usize; 3]; 3], MetricError> {
    check(predictions, gold)?;
    let mut m = [[0usize; 3]; 3];
    for (p, g) in predictions.iter().zip(gold) {
        m[g.index()][p.index()] += 1;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Precision, recall and F1 for each of the three classes. Undefined ratios
/// (zero denominators) are 0.
pub fn per_class(predictions: &[Label], gold: &[Label]) -> Result<Vec<ClassScores>, MetricError> {
    let m = confusion_matrix(predictions, gold)?;
    Ok(Label::ALL
        .iter()
        .map(|&label| {
            let k = label.index();
            let tp = m[k][k] as f64;
            let predicted: usize = (0..3).map(|g| m[g][k]).sum();
            let support: usize = m[k].iter().sum();
            let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassScores {
                label,
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect())
}

/// Unweighted mean of per-class F1 over all three classes; a class absent
/// from both gold and predictions contributes 0.
pub fn macro_f1(predictions: &[Label], gold: &[Label]) -> Result<f64, MetricError> {
    Ok(per_class(predictions, gold)?.iter().map(|c| c.f1).sum::<f64>() / 3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassScores>,
}

impl Metrics {
    pub fn compute(predictions: &[Label], gold: &[Label]) -> Result<Self, MetricError> {
        Ok(Metrics {
            accuracy: accuracy(predictions, gold)?,
            macro_f1: macro_f1(predictions, gold)?,
            per_class: per_class(predictions, gold)?,
        })
    }
}
