use super::model::ModelInput;
use super::{Architecture, RecurrentError};
use crate::embedding::EmbeddingMatrix;
use crate::text::{ContextBundle, Token};

/// How a context bundle becomes per-side token sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputSpec {
    pub arch: Architecture,
    /// Pad/truncate every side to this many steps; `None` leaves lengths as is.
    pub pad_length: Option<usize>,
    /// Include the target tokens at the end of both side sequences of the
    /// two-sided models.
    pub target_both_sides: bool,
}

impl InputSpec {
    pub fn new(arch: Architecture, pad_length: Option<usize>) -> Self {
        InputSpec {
            arch,
            pad_length,
            target_both_sides: true,
        }
    }

    /// Width of one timestep vector given the embedding width.
    pub fn step_dim(&self, embedding_dim: usize) -> usize {
        match self.arch {
            Architecture::TcLstm => 2 * embedding_dim,
            _ => embedding_dim,
        }
    }
}

/// Token sequences in processing order, before padding.
///
/// LSTM reads the whole sentence. The two-sided models read `left ++ target`
/// forwards and `target ++ right` backwards, so both runs end on the target.
pub fn side_tokens(bundle: &ContextBundle, arch: Architecture, target_both_sides: bool) -> Vec<Vec<&Token>> {
    match arch {
        Architecture::Lstm => vec![bundle.full.iter().collect()],
        Architecture::TdLstm | Architecture::TcLstm => {
            let target: &[Token] = if target_both_sides { &bundle.target } else { &[] };
            let left = bundle.left.iter().chain(target).collect();
            let right = target.iter().chain(&bundle.right).rev().collect();
            vec![left, right]
        }
    }
}

/// Longest side sequence over `bundles`; the padding length for a training set.
pub fn pad_length_for(bundles: &[ContextBundle], arch: Architecture, target_both_sides: bool) -> usize {
    bundles
        .iter()
        .flat_map(|b| side_tokens(b, arch, target_both_sides).into_iter().map(|s| s.len()))
        .max()
        .unwrap_or(0)
}

/// Keep at most `limit` tokens, preferring those nearest the target. Side
/// sequences end on the target so their tail is kept; the full sentence
/// keeps a window around the target.
fn truncate<'a>(tokens: Vec<&'a Token>, limit: usize, arch: Architecture, bundle: &ContextBundle) -> Vec<&'a Token> {
    if tokens.len() <= limit {
        return tokens;
    }
    let start = match arch {
        Architecture::Lstm => {
            let range = bundle.target_indices();
            let centre = (range.start + range.end) / 2;
            centre.saturating_sub(limit / 2).min(tokens.len() - limit)
        }
        _ => tokens.len() - limit,
    };
    tokens[start..start + limit].to_vec()
}

pub fn build_inputs(
    bundle: &ContextBundle,
    arch: Architecture,
    embedding: &EmbeddingMatrix,
    pad_length: Option<usize>,
) -> Result<ModelInput, RecurrentError> {
    build_inputs_with(bundle, &InputSpec::new(arch, pad_length), embedding)
}

/// Embed each side sequence and pre-pad it with zero vectors. For TCLSTM
/// every real timestep is followed by the mean target embedding; padding
/// steps stay all-zero.
pub fn build_inputs_with(
    bundle: &ContextBundle,
    spec: &InputSpec,
    embedding: &EmbeddingMatrix,
) -> Result<ModelInput, RecurrentError> {
    if bundle.target.is_empty() {
        return Err(RecurrentError::EmptyTarget);
    }
    let d = embedding.dim();
    let target_vector: Option<Vec<f64>> = (spec.arch == Architecture::TcLstm).then(|| {
        let mut mean = vec![0.0; d];
        for token in &bundle.target {
            for (m, v) in mean.iter_mut().zip(embedding.lookup(&token.surface)) {
                *m += v;
            }
        }
        let n = bundle.target.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    });
    let step_dim = spec.step_dim(d);
    let sides = side_tokens(bundle, spec.arch, spec.target_both_sides)
        .into_iter()
        .map(|tokens| {
            let tokens = match spec.pad_length {
                Some(limit) => truncate(tokens, limit, spec.arch, bundle),
                None => tokens,
            };
            let padding = spec.pad_length.map_or(0, |p| p - tokens.len());
            let mut steps = vec![vec![0.0; step_dim]; padding];
            for token in tokens {
                let mut step = Vec::with_capacity(step_dim);
                step.extend_from_slice(embedding.lookup(&token.surface));
                if let Some(t) = &target_vector {
                    step.extend_from_slice(t);
                }
                steps.push(step);
            }
            steps
        })
        .collect();
    Ok(ModelInput { sides })
}
