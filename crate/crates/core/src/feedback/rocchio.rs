use std::collections::{BTreeMap, HashSet};

use super::{Estimate, FeedbackParams, FeedbackPools};
use crate::corpus_io::Topic;
use crate::error::Result;
use crate::index::CollectionIndex;
use crate::ranking::{bm25_term_weight, QueryModel, RankingParams};

/// Mean BM25 document vector of a set of documents.
fn centroid(
    index: &CollectionIndex,
    docs: &[String],
    ranking: &RankingParams,
) -> Result<BTreeMap<String, f64>> {
    let mut sum: BTreeMap<String, f64> = BTreeMap::new();
    if docs.is_empty() {
        return Ok(sum);
    }
    for d in docs {
        let docno = index.require_docno(d)?;
        for &(t, c) in index.doc_terms(docno) {
            let w = bm25_term_weight(index, index.df_by_id(t), c, docno, ranking);
            *sum.entry(index.term(t).to_string()).or_insert(0.0) += w;
        }
    }
    let n = docs.len() as f64;
    for w in sum.values_mut() {
        *w /= n;
    }
    Ok(sum)
}

/// Rocchio update `Q0 + beta * centroid(RP) -/+ gamma * centroid(NRP)` over BM25 document
/// vectors, with raw query counts as `Q0`. Empty pools contribute nothing.
///
/// All original query terms are kept; of the remaining terms, the `m` largest by absolute
/// weight survive.
pub fn estimate_rocchio(
    index: &CollectionIndex,
    q0: &Topic,
    pools: &FeedbackPools,
    params: &FeedbackParams,
    ranking: &RankingParams,
) -> Result<Estimate> {
    params.validate()?;
    let original = QueryModel::from_counts(&q0.terms);
    let mut combined: BTreeMap<String, f64> = original.weights().clone();
    let rel = centroid(index, pools.relevant(), ranking)?;
    let nonrel = centroid(index, pools.nonrelevant(), ranking)?;
    for (t, w) in rel {
        *combined.entry(t).or_insert(0.0) += params.beta * w;
    }
    let gamma = params.gamma_sign.factor() * params.gamma;
    for (t, w) in nonrel {
        *combined.entry(t).or_insert(0.0) += gamma * w;
    }

    let query_terms: HashSet<&str> = q0.terms.iter().map(String::as_str).collect();
    let mut expansion: Vec<(&String, f64)> = combined
        .iter()
        .filter(|(t, w)| !query_terms.contains(t.as_str()) && **w != 0.0)
        .map(|(t, &w)| (t, w))
        .collect();
    expansion.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(b.0)));
    let kept: HashSet<&String> = expansion
        .into_iter()
        .take(params.num_expansion_terms)
        .map(|(t, _)| t)
        .collect();
    let weights: Vec<(String, f64)> = combined
        .iter()
        .filter(|(t, _)| query_terms.contains(t.as_str()) || kept.contains(t))
        .map(|(t, &w)| (t.clone(), w))
        .collect();
    Ok(Estimate::model(QueryModel::vector(weights)?))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::NonRelevantSign;
    use super::*;
    use crate::ranking::bm25_weight;

    fn params(beta: f64, gamma: f64) -> FeedbackParams {
        FeedbackParams {
            beta,
            gamma,
            num_expansion_terms: 10,
            ..Default::default()
        }
    }

    #[test]
    fn no_feedback_is_original_vector() {
        let idx = toy();
        let q0 = Topic::new("q", ["b", "b"]);
        let pools = FeedbackPools::from_judgments([("D1", true), ("D2", false)]).unwrap();
        let est = estimate_rocchio(&idx, &q0, &pools, &params(0.0, 0.0), &RankingParams::default()).unwrap();
        assert_eq!(est.query, QueryModel::from_counts(&["b", "b"]));
    }

    #[test]
    fn positive_centroid_by_hand() {
        let idx = toy();
        let rp = RankingParams::default();
        let q0 = Topic::new("q", ["b"]);
        let pools = FeedbackPools::from_judgments([("D1", true), ("D2", true)]).unwrap();
        let est = estimate_rocchio(&idx, &q0, &pools, &params(1.0, 0.0), &rp).unwrap();
        let a = (bm25_weight(&idx, "a", "D1", &rp).unwrap() + bm25_weight(&idx, "a", "D2", &rp).unwrap()) / 2.0;
        let b = (bm25_weight(&idx, "b", "D1", &rp).unwrap() + bm25_weight(&idx, "b", "D2", &rp).unwrap()) / 2.0;
        assert!((est.query.weight("a") - a).abs() < 1e-12);
        assert!((est.query.weight("b") - (1.0 + b)).abs() < 1e-12);
        // a appears only in D1: ((2.2 * 2) / 3.65) * ln 3, halved by the centroid
        assert!((a - 4.4 / 3.65 * 3f64.ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_sign_convention() {
        let idx = toy();
        let rp = RankingParams::default();
        let q0 = Topic::new("q", ["b"]);
        let pools = FeedbackPools::from_judgments([("D2", true), ("D1", false)]).unwrap();
        let centroid_a = bm25_weight(&idx, "a", "D1", &rp).unwrap();
        let sub = estimate_rocchio(&idx, &q0, &pools, &params(1.0, 1.5), &rp).unwrap();
        assert!((sub.query.weight("a") + 1.5 * centroid_a).abs() < 1e-12);
        assert!(sub.query.weight("a") < 0.0);
        let add = FeedbackParams {
            gamma_sign: NonRelevantSign::Add,
            ..params(1.0, 1.5)
        };
        let added = estimate_rocchio(&idx, &q0, &pools, &add, &rp).unwrap();
        assert!((added.query.weight("a") - 1.5 * centroid_a).abs() < 1e-12);
    }

    #[test]
    fn linear_in_beta() {
        let idx = toy();
        let rp = RankingParams::default();
        let q0 = Topic::new("q", ["b"]);
        let pools = FeedbackPools::from_judgments([("D1", true), ("D2", false)]).unwrap();
        let at = |beta| estimate_rocchio(&idx, &q0, &pools, &params(beta, 0.7), &rp).unwrap().query;
        let (q0w, q1, q2) = (at(0.0), at(1.0), at(2.0));
        for t in ["a", "b"] {
            let predicted = 2.0 * (q1.weight(t) - q0w.weight(t)) + q0w.weight(t);
            assert!((q2.weight(t) - predicted).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_keeps_query_terms() {
        let docs = [
            crate::corpus_io::TermSequence::new("R", ["q", "x", "x", "x", "y", "y", "z"]),
            crate::corpus_io::TermSequence::new("S", ["w"]),
        ];
        let idx = crate::index::build_index(docs).unwrap();
        let q0 = Topic::new("q", ["q", "w"]);
        let pools = FeedbackPools::from_judgments([("R", true)]).unwrap();
        let p = FeedbackParams {
            num_expansion_terms: 1,
            ..params(1.0, 0.0)
        };
        let est = estimate_rocchio(&idx, &q0, &pools, &p, &RankingParams::default()).unwrap();
        let terms: Vec<&str> = est.query.iter().map(|(t, _)| t).collect();
        assert_eq!(terms, ["q", "w", "x"]);
    }
}
