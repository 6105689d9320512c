//! Citation-string parsing with a linear-chain CRF, synthetic corpus
//! generation from citation-style templates, and the evaluation protocol for
//! comparing models trained on different corpora.

pub mod corpus;
pub mod crf;
pub mod error;
pub mod experiments;
pub mod features;
pub mod label;
pub mod metrics;
pub mod reference;
pub mod rng;
pub mod synthgen;
pub mod tokenizer;

pub use corpus::Corpus;
pub use crf::{CrfModel, TrainConfig};
pub use error::{Error, Result};
pub use features::{FeatureConfig, FeatureIndex};
pub use label::{FieldLabel, LabelSet, TokenTag};
pub use reference::{FieldSegment, LabeledReference, Token};
pub use tokenizer::{tokenize, TokenizerConfig};

/// Crate version and model file format, as printed by `--version`.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
