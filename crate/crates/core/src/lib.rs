//! Corpus tooling for low-resource machine translation: FDA data selection,
//! length-ratio filtering, hybrid back-translated corpora, BPE segmentation
//! and corpus-level evaluation with paired bootstrap significance.

pub mod bpe;
pub mod corpus;
pub mod error;
pub mod fda;
pub mod manifest;
pub mod metrics;
pub mod pipeline;

pub use corpus::{Bitext, Monotext, Ngram, Origin, Sentence, SentencePair, TokenizerConfig};
pub use error::{Error, Result};
