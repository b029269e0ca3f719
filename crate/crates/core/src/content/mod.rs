//! TF-IDF profiles of free-text attributes and cosine-similarity lookup.

mod index;
mod tokenize;

pub use index::{idf, term_counts, CorpusIndex, CorpusKey, TermCounts, TermVector};
pub use tokenize::{is_stopword, tokenize, TokenStream};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ContentError {
    #[error("attribute {0:?} is not a free-text attribute")]
    NonTextAttribute(String),
    #[error("entity {0:?} is not indexed")]
    UnknownEntity(String),
    #[error("entity {0:?} has an empty content profile")]
    EmptyProfile(String),
}
