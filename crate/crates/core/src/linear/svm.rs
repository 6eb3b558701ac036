use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LinearError;
use crate::binio;
use crate::corpus::Label;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Regularization trade-off; larger fits the training data harder.
    pub c_value: f64,
    /// Stop when the spread of projected gradients over an epoch drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c_value: 1.0,
            tolerance: 1e-4,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

impl SvmConfig {
    pub fn with_c(c_value: f64) -> Self {
        SvmConfig {
            c_value,
            ..Default::default()
        }
    }
}

/// One-vs-rest linear classifier. Row `k` of `weights` scores `classes[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: Vec<Label>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Per-class optimizer trace.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SvmTrace {
    /// Dual objective after each epoch, one list per class.
    pub dual_objective: Vec<Vec<f64>>,
    pub epochs: Vec<usize>,
    pub converged: Vec<bool>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }

    /// Highest-scoring class; ties go to the earliest class in label order.
    pub fn predict(&self, x: &[f64]) -> Label {
        argmax_label(&self.classes, &self.scores(x))
    }

    pub fn predict_all(&self, features: &[Vec<f64>]) -> Vec<Label> {
        features.iter().map(|x| self.predict(x)).collect()
    }

    /// Sum over classes of the binary primal objective
    /// `0.5 (|w|^2 + b^2) + C * sum max(0, 1 - y (w.x + b))^2`.
    pub fn primal_objective(&self, features: &[Vec<f64>], labels: &[Label], c_value: f64) -> f64 {
        self.classes
            .iter()
            .enumerate()
            .map(|(k, &class)| {
                let w = &self.weights[k];
                let b = self.biases[k];
                let reg = 0.5 * (dot(w, w) + b * b);
                let loss: f64 = features
                    .iter()
                    .zip(labels)
                    .map(|(x, &l)| {
                        let y = if l == class { 1.0 } else { -1.0 };
                        let margin = 1.0 - y * (dot(w, x) + b);
                        if margin > 0.0 {
                            margin * margin
                        } else {
                            0.0
                        }
                    })
                    .sum();
                reg + c_value * loss
            })
            .sum()
    }

    pub fn write<W: Write>(&self, sink: W, config: &SvmConfig) -> std::io::Result<()> {
        let header = ModelHeader {
            kind: "linear-svm".into(),
            classes: self.classes.clone(),
            dims: self.dim(),
            config: config.clone(),
        };
        let mut blocks: Vec<&[f64]> = self.weights.iter().map(Vec::as_slice).collect();
        blocks.push(&self.biases);
        binio::write_blocks(sink, &header, &blocks)
    }

    pub fn read<R: Read>(source: R) -> std::io::Result<(LinearModel, SvmConfig)> {
        let (header, values): (ModelHeader, Vec<f64>) = binio::read_blocks(source)?;
        let k = header.classes.len();
        if values.len() != k * header.dims + k {
            return Err(binio::invalid(format!(
                "expected {} values, found {}",
                k * header.dims + k,
                values.len()
            )));
        }
        let (w, b) = values.split_at(k * header.dims);
        let weights = if header.dims == 0 {
            vec![Vec::new(); k]
        } else {
            w.chunks(header.dims).map(<[f64]>::to_vec).collect()
        };
        Ok((
            LinearModel {
                classes: header.classes,
                weights,
                biases: b.to_vec(),
            },
            header.config,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    kind: String,
    classes: Vec<Label>,
    dims: usize,
    config: SvmConfig,
}

pub(crate) fn argmax_label(classes: &[Label], scores: &[f64]) -> Label {
    let mut best = 0;
    for k in 1..scores.len() {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    classes[best]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn train_svm(features: &[Vec<f64>], labels: &[Label], config: &SvmConfig) -> Result<LinearModel, LinearError> {
    train_svm_traced(features, labels, config).map(|(m, _)| m)
}

/// L2-regularized squared-hinge SVM, one-vs-rest, solved in the dual by
/// coordinate descent with an appended constant feature for the bias.
pub fn train_svm_traced(
    features: &[Vec<f64>],
    labels: &[Label],
    config: &SvmConfig,
) -> Result<(LinearModel, SvmTrace), LinearError> {
    if config.c_value.is_nan() || config.c_value <= 0.0 {
        return Err(LinearError::Config(format!("C must be positive, got {}", config.c_value)));
    }
    if features.len() != labels.len() {
        return Err(LinearError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let dim = features.first().ok_or(LinearError::Empty)?.len();
    for (i, row) in features.iter().enumerate() {
        if row.len() != dim {
            return Err(LinearError::Dimension {
                row: i,
                expected: dim,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(LinearError::NonFinite { row: i });
        }
    }
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(LinearError::SingleClass);
    }

    let sq_norms: Vec<f64> = features.iter().map(|x| dot(x, x) + 1.0).collect();
    let mut model = LinearModel {
        classes: classes.clone(),
        weights: Vec::with_capacity(classes.len()),
        biases: Vec::with_capacity(classes.len()),
    };
    let mut trace = SvmTrace::default();
    for (k, &class) in classes.iter().enumerate() {
        let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let seed = config.seed.wrapping_add(k as u64);
        let solution = solve_binary(features, &y, &sq_norms, config, seed);
        model.weights.push(solution.w);
        model.biases.push(solution.b);
        trace.dual_objective.push(solution.objective);
        trace.epochs.push(solution.epochs);
        trace.converged.push(solution.converged);
    }
    Ok((model, trace))
}

struct BinarySolution {
    w: Vec<f64>,
    b: f64,
    objective: Vec<f64>,
    epochs: usize,
    converged: bool,
}

fn solve_binary(x: &[Vec<f64>], y: &[f64], sq_norms: &[f64], config: &SvmConfig, seed: u64) -> BinarySolution {
    let n = x.len();
    let dim = x[0].len();
    let diag = 0.5 / config.c_value;
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objective = Vec::new();
    let mut epochs = 0;
    let mut converged = false;

    while epochs < config.max_iterations {
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let g = y[i] * (dot(&w, &x[i]) + b) - 1.0 + diag * alpha[i];
            let pg = if alpha[i] == 0.0 { g.min(0.0) } else { g };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / (sq_norms[i] + diag)).max(0.0);
                let step = (alpha[i] - old) * y[i];
                for (wj, &xj) in w.iter_mut().zip(&x[i]) {
                    *wj += step * xj;
                }
                b += step;
            }
        }
        epochs += 1;
        let reg = 0.5 * (dot(&w, &w) + b * b);
        let dual: f64 = alpha.iter().map(|a| diag * 0.5 * a * a - a).sum();
        objective.push(reg + dual);
        if pg_max - pg_min <= config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("linear SVM hit max_iterations={} before tolerance", config.max_iterations);
    }
    BinarySolution {
        w,
        b,
        objective,
        epochs,
        converged,
    }
}
