//! Word-vector storage.
//!
//! Vectors are read from the plain-text `word v1 ... vd` format (GloVe,
//! word2vec text output), optionally preceded by a `count dim` header.
//! Unknown tokens and the masking token [`ZERO_TOKEN`] embed to zeros.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Placeholder for a masked-out token. Contains a NUL so it cannot collide
/// with tokenizer output or file vocabulary.
pub const ZERO_TOKEN: &str = "\u{0}ZERO";

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: expected {expected} values, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad number {value:?}")]
    Number { line: usize, value: String },
    #[error("embedding dimension must be positive")]
    ZeroDim,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    vocab: HashMap<String, usize>,
    words: Vec<String>,
    rows: Vec<f64>,
    zeros: Vec<f64>,
}

/// Result of reading a text vector file.
#[derive(Clone, Debug)]
pub struct LoadedEmbeddings {
    pub matrix: EmbeddingMatrix,
    /// Lines whose word was already present (first occurrence wins).
    pub duplicates: usize,
    pub header_skipped: bool,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        Ok(EmbeddingMatrix {
            dim,
            vocab: HashMap::new(),
            words: Vec::new(),
            rows: Vec::new(),
            zeros: vec![0.0; dim],
        })
    }

    /// Build from `(word, vector)` pairs; later duplicates are ignored.
    pub fn from_pairs<I, S>(dim: usize, pairs: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut m = EmbeddingMatrix::new(dim)?;
        for (i, (word, vector)) in pairs.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(EmbeddingError::Ragged {
                    line: i + 1,
                    expected: dim,
                    found: vector.len(),
                });
            }
            m.push(word.into(), &vector);
        }
        Ok(m)
    }

    fn push(&mut self, word: String, vector: &[f64]) -> bool {
        if self.vocab.contains_key(&word) {
            return false;
        }
        self.vocab.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.rows.extend_from_slice(vector);
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.contains_key(word)
    }

    /// Row of `token`, or the zero vector for unknown and masked tokens.
    pub fn lookup(&self, token: &str) -> &[f64] {
        match self.vocab.get(token) {
            Some(&i) => &self.rows[i * self.dim..(i + 1) * self.dim],
            None => &self.zeros,
        }
    }

    /// Keep only words in `keep`; kept rows are copied unchanged.
    pub fn filter_vocab(&self, keep: &HashSet<String>) -> EmbeddingMatrix {
        let mut out = EmbeddingMatrix::new(self.dim).expect("dim already validated");
        for word in &self.words {
            if keep.contains(word) {
                out.push(word.clone(), self.lookup(word));
            }
        }
        out
    }

    /// Side-by-side concatenation over the union vocabulary; a word missing
    /// from one side gets zeros there. Words of `self` come first.
    pub fn concat(&self, other: &EmbeddingMatrix) -> EmbeddingMatrix {
        let dim = self.dim + other.dim;
        let mut out = EmbeddingMatrix::new(dim).expect("positive dims");
        let mut row = Vec::with_capacity(dim);
        let extra = other.words.iter().filter(|w| !self.contains(w));
        for word in self.words.iter().chain(extra) {
            row.clear();
            row.extend_from_slice(self.lookup(word));
            row.extend_from_slice(other.lookup(word));
            out.push(word.clone(), &row);
        }
        out
    }
}

/// Parse a whitespace-separated text vector file.
///
/// A first line of exactly two integers is treated as a `count dim` header.
/// Blank lines are ignored. The dimension is fixed by the header or by the
/// first vector line; any other width is an error.
pub fn load_text_embeddings(bytes: &[u8]) -> Result<LoadedEmbeddings, EmbeddingError> {
    let text = String::from_utf8_lossy(bytes);
    let mut matrix: Option<EmbeddingMatrix> = None;
    let mut declared_dim = None;
    let mut duplicates = 0;
    let mut header_skipped = false;
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if n == 0 && rest.len() == 1 && word.parse::<u64>().is_ok() {
            if let Ok(dim) = rest[0].parse::<usize>() {
                declared_dim = Some(dim);
                header_skipped = true;
                continue;
            }
        }
        let m = match matrix.as_mut() {
            Some(m) => m,
            None => matrix.insert(EmbeddingMatrix::new(declared_dim.unwrap_or(rest.len()))?),
        };
        if rest.len() != m.dim {
            return Err(EmbeddingError::Ragged {
                line: line_no,
                expected: m.dim,
                found: rest.len(),
            });
        }
        values.clear();
        for v in &rest {
            values.push(v.parse::<f64>().map_err(|_| EmbeddingError::Number {
                line: line_no,
                value: v.to_string(),
            })?);
        }
        if !m.push(word.to_string(), &values) {
            duplicates += 1;
        }
    }
    let matrix = match matrix {
        Some(m) => m,
        None => EmbeddingMatrix::new(declared_dim.unwrap_or(1).max(1))?,
    };
    if duplicates > 0 {
        log::info!("{duplicates} duplicate words ignored while loading embeddings");
    }
    Ok(LoadedEmbeddings {
        matrix,
        duplicates,
        header_skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_plain_file() {
        let loaded = load_text_embeddings(b"a 1 2\nb 3 4\nc 5 6\n").unwrap();
        assert_eq!(loaded.matrix.len(), 3);
        assert_eq!(loaded.matrix.dim(), 2);
        assert_eq!(loaded.matrix.lookup("b"), &[3.0, 4.0]);
        assert!(!loaded.header_skipped);
    }

    #[test]
    fn skips_header() {
        let loaded = load_text_embeddings(b"400000 2\na 1 2\n").unwrap();
        assert!(loaded.header_skipped);
        assert_eq!(loaded.matrix.len(), 1);
    }

    #[test]
    fn duplicate_first_wins() {
        let loaded = load_text_embeddings(b"a 1 2\nb 3 4\na 9 9\n").unwrap();
        assert_eq!(loaded.duplicates, 1);
        assert_eq!(loaded.matrix.len(), 3 - 1);
        assert_eq!(loaded.matrix.lookup("a"), &[1.0, 2.0]);
    }

    #[test]
    fn ragged_row_reports_line() {
        match load_text_embeddings(b"a 1 2\nb 3\n") {
            Err(EmbeddingError::Ragged { line: 2, expected: 2, found: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lookups() {
        let m = EmbeddingMatrix::from_pairs(2, [("x", vec![1.0, -1.0])]).unwrap();
        assert_eq!(m.lookup("x"), &[1.0, -1.0]);
        assert_eq!(m.lookup("oov"), &[0.0, 0.0]);
        assert_eq!(m.lookup(ZERO_TOKEN), &[0.0, 0.0]);
    }

    #[test]
    fn filtering() {
        let m = EmbeddingMatrix::from_pairs(2, [("x", vec![1.0, 2.0]), ("y", vec![3.0, 4.0])]).unwrap();
        let all: HashSet<String> = m.words().iter().cloned().collect();
        assert_eq!(m.filter_vocab(&all), m);
        let none = m.filter_vocab(&HashSet::new());
        assert!(none.is_empty());
        assert_eq!(none.lookup("x"), &[0.0, 0.0]);
        let just_y = m.filter_vocab(&["y".to_string()].into_iter().collect());
        assert_eq!(just_y.lookup("y"), m.lookup("y"));
        assert_eq!(just_y.lookup("x"), &[0.0, 0.0]);
    }

    #[test]
    fn concatenation() {
        let a = EmbeddingMatrix::from_pairs(2, [("x", vec![1.0, 2.0]), ("y", vec![3.0, 4.0])]).unwrap();
        let b = EmbeddingMatrix::from_pairs(3, [("y", vec![5.0, 6.0, 7.0]), ("z", vec![8.0, 9.0, 10.0])]).unwrap();
        let c = a.concat(&b);
        assert_eq!(c.dim(), 5);
        assert_eq!(c.len(), 3);
        assert_eq!(c.lookup("x"), &[1.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.lookup("y"), &[3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(c.lookup("z"), &[0.0, 0.0, 8.0, 9.0, 10.0]);

        let d = EmbeddingMatrix::from_pairs(1, [("z", vec![-1.0])]).unwrap();
        let left = a.concat(&b).concat(&d);
        let right = a.concat(&b.concat(&d));
        for w in ["x", "y", "z", "q"] {
            assert_eq!(left.lookup(w), right.lookup(w));
        }
    }

    #[test]
    fn dims_add() {
        let a = EmbeddingMatrix::new(50).unwrap();
        let b = EmbeddingMatrix::new(200).unwrap();
        assert_eq!(a.concat(&b).dim(), 250);
    }
}
