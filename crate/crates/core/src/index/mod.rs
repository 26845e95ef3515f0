//! In-memory inverted index with a forward store.
//!
//! Postings map each term to `(doc, count)` pairs sorted by internal document number; the
//! forward store keeps each document's term counts, which the feedback models need for
//! every judged document. Internal numbers follow arrival order and never leak into scores:
//! rankers iterate query terms in lexicographic order and break ties on external ids.

mod snapshot;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{parse_trec_collection, Analyzer, CollectionFormat, TermSequence};
use crate::error::{Error, Result};

pub use snapshot::{load_index, save_index, FORMAT_VERSION};

pub type DocNo = u32;
pub type TermNo = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocNo,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionStats {
    pub num_docs: usize,
    pub total_terms: u64,
    pub avg_doc_len: f64,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermStats {
    pub term: String,
    pub df: u32,
    pub cf: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionIndex {
    lexicon: Vec<String>,
    term_ids: HashMap<String, TermNo>,
    df: Vec<u32>,
    cf: Vec<u64>,
    postings: Vec<Vec<Posting>>,
    /// Per document, `(term, count)` sorted by term number.
    forward: Vec<Vec<(TermNo, u32)>>,
    doc_lengths: Vec<u32>,
    doc_ids: Vec<String>,
    doc_lookup: HashMap<String, DocNo>,
    /// Either empty or one entry per document.
    snippets: Vec<String>,
    analyzer: Option<Analyzer>,
    stats: CollectionStats,
}

/// Single-writer index construction.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    lexicon: Vec<String>,
    term_ids: HashMap<String, TermNo>,
    postings: Vec<Vec<Posting>>,
    forward: Vec<Vec<(TermNo, u32)>>,
    doc_lengths: Vec<u32>,
    doc_ids: Vec<String>,
    doc_lookup: HashMap<String, DocNo>,
    snippets: Vec<String>,
    analyzer: Option<Analyzer>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record the analyzer the documents were normalized with, so topics can be
    /// normalized identically after the index is reloaded.
    pub fn with_analyzer(mut self, analyzer: Analyzer) -> Self {
        self.analyzer = Some(analyzer);
        self
    }

    pub fn add(&mut self, doc: TermSequence) -> Result<()> {
        self.add_inner(doc, None)
    }

    /// Add a document together with a short display snippet. Either every document or
    /// none should carry a snippet.
    pub fn add_with_snippet(&mut self, doc: TermSequence, snippet: &str) -> Result<()> {
        self.add_inner(doc, Some(snippet))
    }

    fn add_inner(&mut self, doc: TermSequence, snippet: Option<&str>) -> Result<()> {
        if doc.doc_id.is_empty() || doc.doc_id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!(
                "document id {:?} is empty or contains whitespace",
                doc.doc_id
            )));
        }
        if self.doc_lookup.contains_key(&doc.doc_id) {
            return Err(Error::DuplicateDocument(doc.doc_id));
        }
        let docno = self.doc_ids.len() as DocNo;
        let mut counts: HashMap<TermNo, u32> = HashMap::new();
        for term in &doc.terms {
            let id = match self.term_ids.get(term) {
                Some(&id) => id,
                None => {
                    let id = self.lexicon.len() as TermNo;
                    self.lexicon.push(term.clone());
                    self.term_ids.insert(term.clone(), id);
                    self.postings.push(Vec::new());
                    id
                }
            };
            *counts.entry(id).or_insert(0) += 1;
        }
        let mut fwd: Vec<(TermNo, u32)> = counts.into_iter().collect();
        fwd.sort_unstable();
        for &(term, count) in &fwd {
            self.postings[term as usize].push(Posting { doc: docno, count });
        }
        self.forward.push(fwd);
        self.doc_lengths.push(doc.terms.len() as u32);
        self.doc_lookup.insert(doc.doc_id.clone(), docno);
        self.doc_ids.push(doc.doc_id);
        if let Some(s) = snippet {
            self.snippets.resize(docno as usize, String::new());
            self.snippets.push(s.to_string());
        }
        Ok(())
    }

    pub fn build(mut self) -> CollectionIndex {
        if !self.snippets.is_empty() {
            self.snippets.resize(self.doc_ids.len(), String::new());
        }
        let df: Vec<u32> = self.postings.iter().map(|p| p.len() as u32).collect();
        let cf: Vec<u64> = self
            .postings
            .iter()
            .map(|p| p.iter().map(|x| u64::from(x.count)).sum())
            .collect();
        let total_terms: u64 = self.doc_lengths.iter().map(|&l| u64::from(l)).sum();
        let num_docs = self.doc_ids.len();
        let stats = CollectionStats {
            num_docs,
            total_terms,
            avg_doc_len: if num_docs == 0 {
                0.0
            } else {
                total_terms as f64 / num_docs as f64
            },
            vocab_size: self.lexicon.len(),
        };
        CollectionIndex {
            lexicon: self.lexicon,
            term_ids: self.term_ids,
            df,
            cf,
            postings: self.postings,
            forward: self.forward,
            doc_lengths: self.doc_lengths,
            doc_ids: self.doc_ids,
            doc_lookup: self.doc_lookup,
            snippets: self.snippets,
            analyzer: self.analyzer,
            stats,
        }
    }
}

/// Build an index from normalized documents. Fails on the first duplicate document id.
pub fn build_index<I>(docs: I) -> Result<CollectionIndex>
where
    I: IntoIterator<Item = TermSequence>,
{
    let mut builder = IndexBuilder::new();
    for doc in docs {
        builder.add(doc)?;
    }
    Ok(builder.build())
}

/// Characters of raw text kept per document for display.
pub const SNIPPET_CHARS: usize = 400;

/// Stream a TREC collection file through `analyzer` into an index that keeps the analyzer
/// and a display snippet per document.
pub fn index_trec_file(path: &Path, format: CollectionFormat, analyzer: &Analyzer) -> Result<CollectionIndex> {
    let mut builder = IndexBuilder::new().with_analyzer(analyzer.clone());
    for doc in parse_trec_collection(path, format)? {
        let doc = doc?;
        let snippet: String = doc.text.chars().take(SNIPPET_CHARS).collect();
        builder.add_with_snippet(TermSequence::from_raw(&doc, analyzer), &snippet)?;
    }
    Ok(builder.build())
}

impl CollectionIndex {
    pub fn stats(&self) -> &CollectionStats {
        &self.stats
    }

    pub fn num_docs(&self) -> usize {
        self.stats.num_docs
    }

    pub fn total_terms(&self) -> u64 {
        self.stats.total_terms
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.stats.avg_doc_len
    }

    pub fn analyzer(&self) -> Option<&Analyzer> {
        self.analyzer.as_ref()
    }

    pub fn term_id(&self, term: &str) -> Option<TermNo> {
        self.term_ids.get(term).copied()
    }

    pub fn term(&self, id: TermNo) -> &str {
        &self.lexicon[id as usize]
    }

    pub fn df(&self, term: &str) -> u32 {
        self.term_id(term).map_or(0, |t| self.df[t as usize])
    }

    pub fn cf(&self, term: &str) -> u64 {
        self.term_id(term).map_or(0, |t| self.cf[t as usize])
    }

    pub fn df_by_id(&self, id: TermNo) -> u32 {
        self.df[id as usize]
    }

    pub fn cf_by_id(&self, id: TermNo) -> u64 {
        self.cf[id as usize]
    }

    pub fn term_stats(&self, term: &str) -> Option<TermStats> {
        let id = self.term_id(term)?;
        Some(TermStats {
            term: term.to_string(),
            df: self.df[id as usize],
            cf: self.cf[id as usize],
        })
    }

    /// Postings of a term; empty for out-of-vocabulary terms.
    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_id(term)
            .map_or(&[][..], |t| &self.postings[t as usize])
    }

    pub fn postings_by_id(&self, id: TermNo) -> &[Posting] {
        &self.postings[id as usize]
    }

    pub fn lexicon(&self) -> &[String] {
        &self.lexicon
    }

    pub fn docno(&self, doc_id: &str) -> Option<DocNo> {
        self.doc_lookup.get(doc_id).copied()
    }

    pub fn require_docno(&self, doc_id: &str) -> Result<DocNo> {
        self.docno(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))
    }

    pub fn doc_id(&self, docno: DocNo) -> &str {
        &self.doc_ids[docno as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_len(&self, docno: DocNo) -> u32 {
        self.doc_lengths[docno as usize]
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    /// `(term, count)` pairs of a document, ordered by term number.
    pub fn doc_terms(&self, docno: DocNo) -> &[(TermNo, u32)] {
        &self.forward[docno as usize]
    }

    /// Exact term counts of a document.
    pub fn doc_vector(&self, doc_id: &str) -> Result<BTreeMap<String, u32>> {
        let docno = self.require_docno(doc_id)?;
        Ok(self
            .doc_terms(docno)
            .iter()
            .map(|&(t, c)| (self.term(t).to_string(), c))
            .collect())
    }

    pub fn snippet(&self, docno: DocNo) -> Option<&str> {
        self.snippets.get(docno as usize).map(String::as_str)
    }

    /// Occurrences of `term` in the document; 0 when absent.
    pub fn term_count(&self, term: TermNo, docno: DocNo) -> u32 {
        let fwd = &self.forward[docno as usize];
        fwd.binary_search_by_key(&term, |&(t, _)| t)
            .map_or(0, |i| fwd[i].1)
    }
}
