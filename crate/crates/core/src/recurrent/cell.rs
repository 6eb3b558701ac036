use super::params::CellParams;
use super::RecurrentError;

/// Cached activations of one timestep, enough to run the step backwards.
#[derive(Clone, Debug)]
struct Step {
    /// `[x_t ; h_{t-1}]`.
    xh: Vec<f64>,
    input: Vec<f64>,
    forget: Vec<f64>,
    output: Vec<f64>,
    candidate: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Result of running one cell over a sequence from a zero initial state.
#[derive(Clone, Debug)]
pub struct CellTrace {
    /// `h_1 .. h_T`.
    pub hidden: Vec<Vec<f64>>,
    /// `c_T`.
    pub final_cell: Vec<f64>,
    steps: Vec<Step>,
}

impl CellTrace {
    /// `h_T`, or the zero vector for an empty sequence.
    pub fn final_hidden(&self, hidden_dim: usize) -> Vec<f64> {
        self.hidden.last().cloned().unwrap_or_else(|| vec![0.0; hidden_dim])
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Run the standard LSTM recurrences:
/// `i, f, o = sigma(W [x; h] + b)`, `g = tanh(...)`,
/// `c_t = f * c_{t-1} + i * g`, `h_t = o * tanh(c_t)`.
pub fn lstm_forward(params: &CellParams, inputs: &[Vec<f64>]) -> Result<CellTrace, RecurrentError> {
    let h = params.hidden;
    let cols = params.columns();
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut steps = Vec::with_capacity(inputs.len());
    let mut hidden = Vec::with_capacity(inputs.len());
    let mut z = vec![0.0; 4 * h];
    for (t, x) in inputs.iter().enumerate() {
        if x.len() != params.input_dim {
            return Err(RecurrentError::Dimension {
                step: t,
                expected: params.input_dim,
                found: x.len(),
            });
        }
        let mut xh = Vec::with_capacity(cols);
        xh.extend_from_slice(x);
        xh.extend_from_slice(&h_prev);
        for (r, zr) in z.iter_mut().enumerate() {
            let row = &params.weights[r * cols..(r + 1) * cols];
            *zr = params.bias[r] + row.iter().zip(&xh).map(|(w, v)| w * v).sum::<f64>();
        }
        let input: Vec<f64> = z[..h].iter().map(|&v| sigmoid(v)).collect();
        let forget: Vec<f64> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let output: Vec<f64> = z[2 * h..3 * h].iter().map(|&v| sigmoid(v)).collect();
        let candidate: Vec<f64> = z[3 * h..].iter().map(|v| v.tanh()).collect();
        let c: Vec<f64> = (0..h).map(|j| forget[j] * c_prev[j] + input[j] * candidate[j]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h_t: Vec<f64> = (0..h).map(|j| output[j] * tanh_c[j]).collect();
        steps.push(Step {
            xh,
            input,
            forget,
            output,
            candidate,
            c_prev: std::mem::replace(&mut c_prev, c),
            tanh_c,
        });
        hidden.push(h_t.clone());
        h_prev = h_t;
    }
    Ok(CellTrace {
        hidden,
        final_cell: c_prev,
        steps,
    })
}

/// Backpropagation through time. `dh_final` is the loss gradient with
/// respect to the last hidden state; gradients are accumulated into `grads`
/// (same shape as `params`).
pub fn lstm_backward(
    params: &CellParams,
    trace: &CellTrace,
    dh_final: &[f64],
    grads: &mut CellParams,
) -> Result<(), RecurrentError> {
    let h = params.hidden;
    if dh_final.len() != h {
        return Err(RecurrentError::Dimension {
            step: trace.len(),
            expected: h,
            found: dh_final.len(),
        });
    }
    let cols = params.columns();
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for step in trace.steps.iter().rev() {
        for j in 0..h {
            let (i, f, o, g) = (step.input[j], step.forget[j], step.output[j], step.candidate[j]);
            let tc = step.tanh_c[j];
            let dc_j = dc[j] + dh[j] * o * (1.0 - tc * tc);
            dz[j] = dc_j * g * i * (1.0 - i);
            dz[h + j] = dc_j * step.c_prev[j] * f * (1.0 - f);
            dz[2 * h + j] = dh[j] * tc * o * (1.0 - o);
            dz[3 * h + j] = dc_j * i * (1.0 - g * g);
            dc[j] = dc_j * f;
        }
        let mut dxh = vec![0.0; cols];
        for (r, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grads.bias[r] += d;
            let row = &params.weights[r * cols..(r + 1) * cols];
            let grow = &mut grads.weights[r * cols..(r + 1) * cols];
            for k in 0..cols {
                grow[k] += d * step.xh[k];
                dxh[k] += d * row[k];
            }
        }
        dh.copy_from_slice(&dxh[params.input_dim..]);
    }
    Ok(())
}
