//! Topic modeling: lemma documents, phrase merging, LDA by collapsed Gibbs
//! sampling, UMass coherence and per-topic reports.

mod lda;
mod preprocess;
mod report;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lda::{fit, fit_with_observer, LdaModel, LdaParams};
pub use preprocess::{merge_ngrams, merge_pass, preprocess, Pos, PosLexicon, Stopwords};
pub use report::{
    coherence, report, select_model, top_words, Example, Keyword, SelectParams, TopicReport,
    TopicSummary,
};

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("model container: {0}")]
    Model(String),
}

/// Lemmas of one tweet after filtering, in original order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub source_id: String,
    pub lemmas: Vec<String>,
}
