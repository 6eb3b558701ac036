use std::fmt;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;

/// Per-dimension reduction over a context's embedding rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolOp {
    Max,
    Min,
    Avg,
    Std,
    Prod,
}

impl PoolOp {
    /// Fixed order used when concatenating the five pooled vectors.
    pub const ALL: [PoolOp; 5] = [PoolOp::Max, PoolOp::Min, PoolOp::Avg, PoolOp::Std, PoolOp::Prod];
}

impl fmt::Display for PoolOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PoolOp::Max => "max",
            PoolOp::Min => "min",
            PoolOp::Avg => "avg",
            PoolOp::Std => "std",
            PoolOp::Prod => "prod",
        };
        f.write_str(s)
    }
}

/// Reduce `rows` (each of length `dim`) column-wise.
///
/// An empty context yields the zero vector for every op. `Std` is the
/// population deviation; sums run left to right over the rows and `Prod`
/// multiplies sequentially with no rescaling.
pub fn pool<R: AsRef<[f64]>>(rows: &[R], dim: usize, op: PoolOp) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    pool_into(rows, op, &mut out);
    out
}

pub(crate) fn pool_into<R: AsRef<[f64]>>(rows: &[R], op: PoolOp, out: &mut [f64]) {
    let n = rows.len();
    if n == 0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let first = rows[0].as_ref();
    match op {
        PoolOp::Max | PoolOp::Min | PoolOp::Prod => {
            out.copy_from_slice(first);
            for row in &rows[1..] {
                for (acc, &v) in out.iter_mut().zip(row.as_ref()) {
                    *acc = match op {
                        PoolOp::Max => acc.max(v),
                        PoolOp::Min => acc.min(v),
                        _ => *acc * v,
                    };
                }
            }
        }
        PoolOp::Avg | PoolOp::Std => {
            out.iter_mut().for_each(|v| *v = 0.0);
            for row in rows {
                for (acc, &v) in out.iter_mut().zip(row.as_ref()) {
                    *acc += v;
                }
            }
            let n = n as f64;
            out.iter_mut().for_each(|v| *v /= n);
            if op == PoolOp::Std {
                for (j, mean) in out.iter_mut().enumerate() {
                    let mut sq = 0.0;
                    for row in rows {
                        let d = row.as_ref()[j] - *mean;
                        sq += d * d;
                    }
                    *mean = (sq / n).sqrt();
                }
            }
        }
    }
}

/// Five pooled vectors (MAX, MIN, AVG, STD, PROD) of the tokens' embeddings,
/// concatenated: length `5 * dim`.
pub fn context_features<S: AsRef<str>>(tokens: &[S], embedding: &EmbeddingMatrix) -> Vec<f64> {
    let dim = embedding.dim();
    let rows: Vec<&[f64]> = tokens.iter().map(|t| embedding.lookup(t.as_ref())).collect();
    let mut out = vec![0.0; PoolOp::ALL.len() * dim];
    for (chunk, op) in out.chunks_mut(dim).zip(PoolOp::ALL) {
        pool_into(&rows, op, chunk);
    }
    out
}

/// Per-dimension median across occurrence vectors; an even count averages
/// the two middle values.
pub fn median_pool(vectors: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    if vectors.len() == 1 {
        return first.clone();
    }
    let n = vectors.len();
    let mut column = vec![0.0; n];
    (0..first.len())
        .map(|j| {
            for (slot, v) in column.iter_mut().zip(vectors) {
                *slot = v[j];
            }
            column.sort_by(f64::total_cmp);
            if n % 2 == 1 {
                column[n / 2]
            } else {
                (column[n / 2 - 1] + column[n / 2]) / 2.0
            }
        })
        .collect()
}
