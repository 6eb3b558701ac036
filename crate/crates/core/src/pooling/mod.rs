//! Neural-pooling features.
//!
//! Contexts of a target occurrence (left, right, target, full text,
//! lexicon-masked left/right, dependency-linked words) are mapped to word
//! vectors and reduced with five per-dimension pooling functions. When a
//! target occurs several times the occurrence vectors are combined by a
//! per-dimension median.

mod depgraph;
mod features;
mod ops;

use thiserror::Error;

pub use depgraph::{align_graph, dep_context, dep_context_tokens, parse_conll, DepGraph};
pub use features::{
    assemble_features, read_feature_records, write_feature_records, Context, Family, FeatureFileHeader,
    FeatureVector, Layout, LayoutEntry, MethodSpec,
};
pub use ops::{context_features, median_pool, pool, PoolOp};

pub(crate) use features::assemble_values;

#[derive(Debug, Error)]
pub enum PoolingError {
    #[error("method {0} needs a sentiment lexicon")]
    MissingLexicon(Family),
    #[error("method {0} needs dependency graphs")]
    MissingGraph(Family),
    #[error("unknown method family {0:?}")]
    UnknownFamily(String),
    #[error("no target occurrences to pool")]
    NoOccurrences,
    #[error("sentence {sentence}: {reason}")]
    Graph { sentence: String, reason: String },
    #[error("sentence {sentence}: target index {index:?} not in graph")]
    TargetIndex { sentence: String, index: Option<usize> },
    #[error("sentence {sentence}: parse tokens {graph:?} do not align with text tokens {text:?}")]
    Alignment {
        sentence: String,
        graph: String,
        text: String,
    },
    #[error("CoNLL line {line}: {message}")]
    Conll { line: usize, message: String },
}
