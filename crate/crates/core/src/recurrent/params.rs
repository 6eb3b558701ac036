use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Architecture, RecurrentError};
use crate::binio;

/// Half-width of the uniform initialization interval.
pub const INIT_RANGE: f64 = 0.003;

/// Number of output classes (negative, neutral, positive).
pub const CLASSES: usize = 3;

/// Weights of one LSTM cell. `weights` is `4 * hidden` rows by
/// `input_dim + hidden` columns, row-major, with gate blocks in the order
/// input, forget, output, candidate; each row acts on `[x_t ; h_{t-1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl CellParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        CellParams {
            input_dim,
            hidden,
            weights: vec![0.0; 4 * hidden * (input_dim + hidden)],
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn uniform<R: Rng>(input_dim: usize, hidden: usize, range: f64, rng: &mut R) -> Self {
        let mut cell = CellParams::zeros(input_dim, hidden);
        for v in cell.weights.iter_mut().chain(cell.bias.iter_mut()) {
            *v = rng.gen_range(-range..=range);
        }
        cell
    }

    pub fn columns(&self) -> usize {
        self.input_dim + self.hidden
    }
}

/// All parameters of one recurrent classifier: one cell (LSTM) or two
/// (left and right for TDLSTM/TCLSTM) plus the softmax projection.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub arch: Architecture,
    pub cells: Vec<CellParams>,
    /// `CLASSES` rows by `cells.len() * hidden` columns.
    pub proj_weights: Vec<f64>,
    pub proj_bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsHeader {
    kind: String,
    arch: Architecture,
    input_dim: usize,
    hidden: usize,
    cells: usize,
    tensors: Vec<(String, usize)>,
}

impl LstmParams {
    /// Zero-initialized parameters. `input_dim` is the per-timestep width
    /// the cells see (twice the embedding width for TCLSTM).
    pub fn zeros(arch: Architecture, input_dim: usize, hidden: usize) -> Self {
        let cells = arch.sides();
        LstmParams {
            arch,
            cells: (0..cells).map(|_| CellParams::zeros(input_dim, hidden)).collect(),
            proj_weights: vec![0.0; CLASSES * cells * hidden],
            proj_bias: vec![0.0; CLASSES],
        }
    }

    /// Every weight and bias drawn from `U(-range, range)` with a seeded
    /// generator.
    pub fn init(arch: Architecture, input_dim: usize, hidden: usize, seed: u64, range: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (0..arch.sides())
            .map(|_| CellParams::uniform(input_dim, hidden, range, &mut rng))
            .collect();
        let width = arch.sides() * hidden;
        let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(-range..=range)).collect::<Vec<_>>();
        let proj_weights = draw(CLASSES * width);
        let proj_bias = draw(CLASSES);
        LstmParams {
            arch,
            cells,
            proj_weights,
            proj_bias,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.cells[0].input_dim
    }

    pub fn hidden(&self) -> usize {
        self.cells[0].hidden
    }

    /// Named views of every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (i, cell) in self.cells.iter().enumerate() {
            out.push((format!("cell{i}.weights"), cell.weights.as_slice()));
            out.push((format!("cell{i}.bias"), cell.bias.as_slice()));
        }
        out.push(("proj.weights".into(), self.proj_weights.as_slice()));
        out.push(("proj.bias".into(), self.proj_bias.as_slice()));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for cell in &mut self.cells {
            out.push(cell.weights.as_mut_slice());
            out.push(cell.bias.as_mut_slice());
        }
        out.push(self.proj_weights.as_mut_slice());
        out.push(self.proj_bias.as_mut_slice());
        out
    }

    /// `self -= rate * grads`.
    pub fn sgd_step(&mut self, grads: &LstmParams, rate: f64) {
        for (p, g) in self.tensors_mut().into_iter().zip(grads.tensors()) {
            for (pv, gv) in p.iter_mut().zip(g.1) {
                *pv -= rate * gv;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    pub fn write<W: Write>(&self, sink: W) -> std::io::Result<()> {
        let tensors = self.tensors();
        let header = ParamsHeader {
            kind: "lstm-params".into(),
            arch: self.arch,
            input_dim: self.input_dim(),
            hidden: self.hidden(),
            cells: self.cells.len(),
            tensors: tensors.iter().map(|(n, t)| (n.clone(), t.len())).collect(),
        };
        let blocks: Vec<&[f64]> = tensors.iter().map(|(_, t)| *t).collect();
        binio::write_blocks(sink, &header, &blocks)
    }

    pub fn read<R: Read>(source: R) -> Result<Self, RecurrentError> {
        let (header, values): (ParamsHeader, Vec<f64>) = binio::read_blocks(source)?;
        if header.cells != header.arch.sides() {
            return Err(RecurrentError::Io(binio::invalid("cell count does not match architecture")));
        }
        let mut params = LstmParams::zeros(header.arch, header.input_dim, header.hidden);
        let expected: usize = params.tensors().iter().map(|(_, t)| t.len()).sum();
        if values.len() != expected {
            return Err(RecurrentError::Io(binio::invalid(format!(
                "expected {expected} values, found {}",
                values.len()
            ))));
        }
        let mut offset = 0;
        for tensor in params.tensors_mut() {
            let n = tensor.len();
            tensor.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_bounded_and_seeded() {
        let a = LstmParams::init(Architecture::TdLstm, 4, 3, 11, INIT_RANGE);
        let b = LstmParams::init(Architecture::TdLstm, 4, 3, 11, INIT_RANGE);
        let c = LstmParams::init(Architecture::TdLstm, 4, 3, 12, INIT_RANGE);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for (_, t) in a.tensors() {
            assert!(t.iter().all(|v| v.abs() <= INIT_RANGE));
        }
        assert_eq!(a.cells.len(), 2);
        assert_eq!(a.cells[0].weights.len(), 12 * 7);
        assert_eq!(a.proj_weights.len(), 3 * 6);
    }

    #[test]
    fn file_round_trip() {
        let p = LstmParams::init(Architecture::TcLstm, 4, 2, 3, 0.5);
        let mut buf = Vec::new();
        p.write(&mut buf).unwrap();
        assert_eq!(LstmParams::read(buf.as_slice()).unwrap(), p);
        assert!(LstmParams::read(&buf[..buf.len() - 8]).is_err());
    }
}
