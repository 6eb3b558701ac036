//! Target-dependent sentiment analysis benchmark toolkit.
//!
//! The crate covers the whole pipeline: dataset parsers ([`corpus`]),
//! tokenization ([`text`]), sentiment lexicons ([`lexicon`]), word vectors
//! ([`embedding`]), neural pooling features ([`pooling`]), a linear SVM
//! ([`linear`]), LSTM baselines ([`recurrent`]) and the experiment
//! harness ([`harness`]).

pub mod corpus;
pub mod text;
pub mod embedding;
pub mod lexicon;
pub mod pooling;
pub mod linear;
pub mod recurrent;
pub mod harness;

mod binio;
