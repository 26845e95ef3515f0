//! Collections, topics, qrels and text normalization.

mod analysis;
pub mod krovetz;
mod qrels;
mod topics;
mod trec;

pub use analysis::{normalize, tokenize, Analyzer, StemmerKind, Stoplist};
pub use qrels::{parse_qrels, QrelSet};
pub use topics::{parse_topics, parse_topics_str, TopicField, TopicFormat};
pub use trec::{parse_trec_collection, CollectionFormat, TrecReader};

/// A document or passage as read from a collection file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub doc_id: String,
    /// Indexable fields concatenated, markup removed.
    pub text: String,
}

/// A document after normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSequence {
    pub doc_id: String,
    pub terms: Vec<String>,
}

impl TermSequence {
    pub fn new(doc_id: impl Into<String>, terms: impl IntoIterator<Item = impl Into<String>>) -> Self {
        TermSequence {
            doc_id: doc_id.into(),
            terms: terms.into_iter().map(Into::into).collect(),
        }
    }

    pub fn from_raw(doc: &RawDocument, analyzer: &Analyzer) -> Self {
        TermSequence {
            doc_id: doc.doc_id.clone(),
            terms: analyzer.normalize(&doc.text),
        }
    }
}

/// A normalized query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub query_id: String,
    pub terms: Vec<String>,
}

impl Topic {
    pub fn new(query_id: impl Into<String>, terms: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Topic {
            query_id: query_id.into(),
            terms: terms.into_iter().map(Into::into).collect(),
        }
    }
}
