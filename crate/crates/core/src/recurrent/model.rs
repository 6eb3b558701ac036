use super::cell::{lstm_backward, lstm_forward, CellTrace};
use super::params::{LstmParams, CLASSES};
use super::RecurrentError;
use crate::corpus::Label;
use crate::linear::argmax_label;

/// Per-side timestep vectors. One side for LSTM, left and right for the
/// two-sided architectures.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelInput {
    pub sides: Vec<Vec<Vec<f64>>>,
}

/// Cached forward pass of the whole classifier.
#[derive(Clone, Debug)]
pub struct ModelTrace {
    pub cells: Vec<CellTrace>,
    /// Concatenated final hidden states fed to the softmax.
    pub features: Vec<f64>,
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|v| v / total).collect()
}

/// `-log softmax(logits)[label]`, computed with log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: Label) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    lse - logits[label.index()]
}

/// Gradient of the cross-entropy with respect to the logits: `p - onehot`.
pub fn cross_entropy_grad(probabilities: &[f64], label: Label) -> Vec<f64> {
    let mut g = probabilities.to_vec();
    g[label.index()] -= 1.0;
    g
}

pub fn forward(params: &LstmParams, input: &ModelInput) -> Result<ModelTrace, RecurrentError> {
    if input.sides.len() != params.cells.len() {
        return Err(RecurrentError::Sides {
            expected: params.cells.len(),
            found: input.sides.len(),
        });
    }
    let hidden = params.hidden();
    let mut cells = Vec::with_capacity(input.sides.len());
    let mut features = Vec::with_capacity(hidden * input.sides.len());
    for (cell, side) in params.cells.iter().zip(&input.sides) {
        let trace = lstm_forward(cell, side)?;
        features.extend(trace.final_hidden(hidden));
        cells.push(trace);
    }
    let width = features.len();
    let logits: Vec<f64> = (0..CLASSES)
        .map(|k| {
            let row = &params.proj_weights[k * width..(k + 1) * width];
            params.proj_bias[k] + row.iter().zip(&features).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect();
    let probabilities = softmax(&logits);
    Ok(ModelTrace {
        cells,
        features,
        logits,
        probabilities,
    })
}

pub fn loss(params: &LstmParams, input: &ModelInput, label: Label) -> Result<f64, RecurrentError> {
    Ok(cross_entropy(&forward(params, input)?.logits, label))
}

/// Backward pass from a logit gradient through the projection and every
/// cell. Returns gradients shaped like `params`.
pub fn backward(params: &LstmParams, trace: &ModelTrace, dlogits: &[f64]) -> Result<LstmParams, RecurrentError> {
    let hidden = params.hidden();
    let width = trace.features.len();
    let mut grads = LstmParams::zeros(params.arch, params.input_dim(), hidden);
    let mut dfeatures = vec![0.0; width];
    for (k, &d) in dlogits.iter().enumerate() {
        grads.proj_bias[k] += d;
        let row = &params.proj_weights[k * width..(k + 1) * width];
        let grow = &mut grads.proj_weights[k * width..(k + 1) * width];
        for j in 0..width {
            grow[j] += d * trace.features[j];
            dfeatures[j] += d * row[j];
        }
    }
    for (side, (cell, cell_trace)) in params.cells.iter().zip(&trace.cells).enumerate() {
        lstm_backward(
            cell,
            cell_trace,
            &dfeatures[side * hidden..(side + 1) * hidden],
            &mut grads.cells[side],
        )?;
    }
    Ok(grads)
}

/// Cross-entropy loss and its exact gradient for one example.
pub fn loss_and_gradients(
    params: &LstmParams,
    input: &ModelInput,
    label: Label,
) -> Result<(f64, LstmParams), RecurrentError> {
    let trace = forward(params, input)?;
    let loss = cross_entropy(&trace.logits, label);
    let grads = backward(params, &trace, &cross_entropy_grad(&trace.probabilities, label))?;
    Ok((loss, grads))
}

pub fn predict(params: &LstmParams, input: &ModelInput) -> Result<Label, RecurrentError> {
    let trace = forward(params, input)?;
    Ok(argmax_label(&Label::ALL, &trace.logits))
}
