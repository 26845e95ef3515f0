//! Initial retrieval and the scoring rules used after feedback.
//!
//! * Dirichlet-smoothed query likelihood, `sum_w q(w) * ln p_dir(w|x)` with
//!   `p_dir(w|x) = (c(w,x) + mu * cf(w)/|C|_terms) / (|x| + mu)`. With a language-model
//!   query this is rank-equivalent to negative KL divergence.
//! * Dot product between a query vector and a BM25-weighted or MLE document vector.
//!
//! Only documents containing at least one query term are scored. Ties are broken by
//! ascending document id, so identical inputs give identical lists.

mod query;
pub mod run_file;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{CollectionIndex, DocNo};

pub use query::{ModelKind, QueryModel, LM_MASS_TOLERANCE};
pub use run_file::{read_run, read_run_file, RunSet, ScoredList};

/// Background count given to terms the collection has never seen.
const OOV_PSEUDO_COUNT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingParams {
    /// Dirichlet prior.
    pub mu: f64,
    pub k1: f64,
    pub b: f64,
    /// Maximum number of documents returned.
    pub depth: usize,
}

impl Default for RankingParams {
    fn default() -> Self {
        RankingParams {
            mu: 1000.0,
            k1: 1.2,
            b: 0.75,
            depth: 1000,
        }
    }
}

impl RankingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidParameter(format!("k1 must be > 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter(format!("b must be in [0, 1], got {}", self.b)));
        }
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }
}

/// Document representation used by dot-product scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vectorizer {
    Bm25,
    Mle,
}

/// Ranker used to produce the first result list of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialRanker {
    Ql,
    Bm25,
}

impl FromStr for InitialRanker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ql" => Ok(InitialRanker::Ql),
            "bm25" => Ok(InitialRanker::Bm25),
            other => Err(Error::InvalidParameter(format!("unknown ranker {other:?}"))),
        }
    }
}

impl fmt::Display for InitialRanker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialRanker::Ql => "ql",
            InitialRanker::Bm25 => "bm25",
        })
    }
}

/// Rank the original query terms with the given initial ranker.
pub fn retrieve_initial<S: AsRef<str>>(
    index: &CollectionIndex,
    query_terms: &[S],
    ranker: InitialRanker,
    params: &RankingParams,
    exclude: &HashSet<String>,
) -> Result<Vec<ScoredDoc>> {
    let query = QueryModel::from_counts(query_terms);
    match ranker {
        InitialRanker::Ql => retrieve_ql(index, &query, params, exclude),
        InitialRanker::Bm25 => retrieve_dot(index, &query, Vectorizer::Bm25, params, exclude),
    }
}

/// Dirichlet query likelihood. Accepts a language model or raw query counts.
pub fn retrieve_ql(
    index: &CollectionIndex,
    query: &QueryModel,
    params: &RankingParams,
    exclude: &HashSet<String>,
) -> Result<Vec<ScoredDoc>> {
    params.validate()?;
    Ok(score_dirichlet(index, query, params, exclude))
}

/// Negative KL divergence between a query language model and Dirichlet document models,
/// up to the query entropy, which is constant per query.
pub fn retrieve_kl(
    index: &CollectionIndex,
    query: &QueryModel,
    params: &RankingParams,
    exclude: &HashSet<String>,
) -> Result<Vec<ScoredDoc>> {
    query.require(ModelKind::Lm)?;
    params.validate()?;
    Ok(score_dirichlet(index, query, params, exclude))
}

/// Okapi BM25 weight of `term` in a document, `idf = ln((|C| + 1) / df)`.
pub fn bm25_weight(
    index: &CollectionIndex,
    term: &str,
    doc_id: &str,
    params: &RankingParams,
) -> Result<f64> {
    let docno = index.require_docno(doc_id)?;
    Ok(match index.term_id(term) {
        Some(t) => bm25_term_weight(index, index.df_by_id(t), index.term_count(t, docno), docno, params),
        None => 0.0,
    })
}

pub(crate) fn bm25_term_weight(
    index: &CollectionIndex,
    df: u32,
    count: u32,
    docno: DocNo,
    params: &RankingParams,
) -> f64 {
    if count == 0 || df == 0 {
        return 0.0;
    }
    let c = f64::from(count);
    let len = f64::from(index.doc_len(docno));
    let norm = params.k1 * (1.0 - params.b + params.b * len / index.avg_doc_len());
    let idf = ((index.num_docs() as f64 + 1.0) / f64::from(df)).ln();
    (params.k1 + 1.0) * c / (norm + c) * idf
}

/// Dot product of a vector query with BM25 or MLE document vectors.
pub fn retrieve_dot(
    index: &CollectionIndex,
    query: &QueryModel,
    vectorizer: Vectorizer,
    params: &RankingParams,
    exclude: &HashSet<String>,
) -> Result<Vec<ScoredDoc>> {
    query.require(ModelKind::Vector)?;
    params.validate()?;
    let mut acc = Accumulator::new(index.num_docs());
    for (term, qw) in query.iter() {
        let Some(t) = index.term_id(term) else { continue };
        let df = index.df_by_id(t);
        for p in index.postings_by_id(t) {
            let dw = match vectorizer {
                Vectorizer::Bm25 => bm25_term_weight(index, df, p.count, p.doc, params),
                Vectorizer::Mle => f64::from(p.count) / f64::from(index.doc_len(p.doc)),
            };
            acc.add(p.doc, qw * dw);
        }
    }
    Ok(acc.finish(index, exclude, params.depth, |_, s| s))
}

fn score_dirichlet(
    index: &CollectionIndex,
    query: &QueryModel,
    params: &RankingParams,
    exclude: &HashSet<String>,
) -> Vec<ScoredDoc> {
    let total = index.total_terms() as f64;
    if total == 0.0 {
        return Vec::new();
    }
    let mu = params.mu;
    // Every document shares sum_w q(w) ln(mu * p_c(w)); matches add the per-term surplus.
    let mut base = 0.0;
    let mut mass = 0.0;
    let mut acc = Accumulator::new(index.num_docs());
    for (term, qw) in query.iter() {
        let term_id = index.term_id(term);
        let cf = term_id.map_or(OOV_PSEUDO_COUNT, |t| index.cf_by_id(t) as f64);
        let smoothed = mu * cf / total;
        let floor = smoothed.ln();
        base += qw * floor;
        mass += qw;
        if let Some(t) = term_id {
            for p in index.postings_by_id(t) {
                acc.add(p.doc, qw * ((f64::from(p.count) + smoothed).ln() - floor));
            }
        }
    }
    acc.finish(index, exclude, params.depth, |doc, s| {
        s + base - mass * (f64::from(index.doc_len(doc)) + mu).ln()
    })
}

/// Dense score accumulator that remembers which documents were touched.
struct Accumulator {
    scores: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<DocNo>,
}

impl Accumulator {
    fn new(num_docs: usize) -> Self {
        Accumulator {
            scores: vec![0.0; num_docs],
            seen: vec![false; num_docs],
            touched: Vec::new(),
        }
    }

    fn add(&mut self, doc: DocNo, v: f64) {
        let i = doc as usize;
        if !self.seen[i] {
            self.seen[i] = true;
            self.touched.push(doc);
        }
        self.scores[i] += v;
    }

    fn finish(
        self,
        index: &CollectionIndex,
        exclude: &HashSet<String>,
        depth: usize,
        finalize: impl Fn(DocNo, f64) -> f64,
    ) -> Vec<ScoredDoc> {
        let excluded: HashSet<DocNo> = exclude.iter().filter_map(|d| index.docno(d)).collect();
        let mut hits: Vec<(f64, DocNo)> = self
            .touched
            .into_iter()
            .filter(|d| !excluded.contains(d))
            .map(|d| (finalize(d, self.scores[d as usize]), d))
            .collect();
        let cmp = |a: &(f64, DocNo), b: &(f64, DocNo)| {
            b.0.total_cmp(&a.0)
                .then_with(|| index.doc_id(a.1).cmp(index.doc_id(b.1)))
        };
        if hits.len() > depth {
            hits.select_nth_unstable_by(depth - 1, cmp);
            hits.truncate(depth);
        }
        hits.sort_unstable_by(cmp);
        hits.into_iter()
            .map(|(score, d)| ScoredDoc {
                doc_id: index.doc_id(d).to_string(),
                score,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::TermSequence;
    use crate::index::build_index;

    fn toy() -> CollectionIndex {
        build_index([
            TermSequence::new("D1", ["a", "b", "a"]),
            TermSequence::new("D2", ["b"]),
        ])
        .unwrap()
    }

    fn mu1() -> RankingParams {
        RankingParams {
            mu: 1.0,
            ..RankingParams::default()
        }
    }

    fn none() -> HashSet<String> {
        HashSet::new()
    }

    #[test]
    fn ql_single_term() {
        let idx = toy();
        let q = QueryModel::from_counts(&["a"]);
        let hits = retrieve_ql(&idx, &q, &mu1(), &none()).unwrap();
        assert_eq!(hits[0].doc_id, "D1");
        assert!((hits[0].score - 0.625f64.ln()).abs() < 1e-12);
        // D2 has no "a" and is not a candidate; it would score ln 0.25 < ln 0.625.
        assert_eq!(hits.len(), 1);
        let both = retrieve_ql(&idx, &QueryModel::from_counts(&["a", "b"]), &mu1(), &none()).unwrap();
        let d2 = both.iter().find(|h| h.doc_id == "D2").unwrap();
        assert!((d2.score - (0.25f64.ln() + 0.75f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ql_exclusion() {
        let idx = toy();
        let q = QueryModel::from_counts(&["b"]);
        let ex: HashSet<String> = ["D1".to_string()].into();
        let hits = retrieve_ql(&idx, &q, &mu1(), &ex).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, "D2");
    }

    #[test]
    fn oov_query_is_empty() {
        let idx = toy();
        let q = QueryModel::from_counts(&["zzz"]);
        assert!(retrieve_ql(&idx, &q, &mu1(), &none()).unwrap().is_empty());
        let q = QueryModel::from_counts(&["zzz", "a"]);
        let hits = retrieve_ql(&idx, &q, &mu1(), &none()).unwrap();
        assert_eq!(hits.len(), 1);
        assert!(hits[0].score.is_finite());
    }

    #[test]
    fn ties_break_on_doc_id() {
        let idx = build_index([
            TermSequence::new("Z", ["x", "a"]),
            TermSequence::new("M", ["x", "b"]),
            TermSequence::new("A", ["x", "c"]),
        ])
        .unwrap();
        let q = QueryModel::from_counts(&["x"]);
        let ids: Vec<_> = retrieve_ql(&idx, &q, &mu1(), &none())
            .unwrap()
            .into_iter()
            .map(|h| h.doc_id)
            .collect();
        assert_eq!(ids, ["A", "M", "Z"]);
    }

    #[test]
    fn kl_requires_lm() {
        let idx = toy();
        let v = QueryModel::from_counts(&["a"]);
        assert!(matches!(
            retrieve_kl(&idx, &v, &mu1(), &none()),
            Err(Error::ModelKind { .. })
        ));
    }

    #[test]
    fn kl_matches_brute_force() {
        let idx = toy();
        let q = QueryModel::lm([("a".into(), 0.5), ("b".into(), 0.5)]).unwrap();
        let hits = retrieve_kl(&idx, &q, &mu1(), &none()).unwrap();
        // Direct definition: -KL = sum_w p(w) ln p_dir(w) - sum_w p(w) ln p(w).
        let p_c = |w: &str| if w == "a" { 0.5 } else { 0.5 };
        let brute = |c: [f64; 2], len: f64| {
            let mut s = 0.0;
            for (i, w) in ["a", "b"].iter().enumerate() {
                let pd = (c[i] + p_c(w)) / (len + 1.0);
                s += 0.5 * (pd / 0.5f64).ln();
            }
            s
        };
        let d1 = brute([2.0, 1.0], 3.0);
        let d2 = brute([0.0, 1.0], 1.0);
        let entropy_shift = -(0.5f64 * 0.5f64.ln() * 2.0);
        let expected = if d1 > d2 { ["D1", "D2"] } else { ["D2", "D1"] };
        let got: Vec<_> = hits.iter().map(|h| h.doc_id.as_str()).collect();
        assert_eq!(got, expected);
        assert!((hits[0].score + entropy_shift - d1.max(d2)).abs() < 1e-12);
    }

    #[test]
    fn bm25_toy_weight() {
        let idx = toy();
        let p = RankingParams::default();
        let w = bm25_weight(&idx, "a", "D1", &p).unwrap();
        assert!((w - 4.4 / 3.65 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(bm25_weight(&idx, "a", "D2", &p).unwrap(), 0.0);
        assert!(bm25_weight(&idx, "a", "D9", &p).is_err());
        // df = |C|
        let wb = bm25_weight(&idx, "b", "D2", &p).unwrap();
        assert!(wb > 0.0);
    }

    #[test]
    fn dot_mle_weight() {
        let idx = toy();
        let q = QueryModel::vector([("a".into(), 1.0)]).unwrap();
        let hits = retrieve_dot(&idx, &q, Vectorizer::Mle, &mu1(), &none()).unwrap();
        assert_eq!(hits.len(), 1);
        assert!((hits[0].score - 2.0 / 3.0).abs() < 1e-15);
        let empty = QueryModel::vector(Vec::new()).unwrap();
        assert!(retrieve_dot(&idx, &empty, Vectorizer::Mle, &mu1(), &none())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn depth_truncation() {
        let idx = build_index((0..20).map(|i| TermSequence::new(format!("d{i:02}"), vec!["x"; i + 1])))
            .unwrap();
        let q = QueryModel::from_counts(&["x"]);
        let full = retrieve_ql(&idx, &q, &RankingParams::default(), &none()).unwrap();
        let top5 = retrieve_ql(&idx, &q, &RankingParams::default().with_depth(5), &none()).unwrap();
        assert_eq!(&full[..5], &top5[..]);
    }
}
