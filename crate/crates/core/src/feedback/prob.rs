use std::collections::BTreeMap;

use super::{interpolate, Estimate, FeedbackParams, FeedbackPools};
use crate::corpus_io::Topic;
use crate::error::Result;
use crate::index::CollectionIndex;
use crate::ranking::QueryModel;

/// Relevance weight of a term from its document frequency in the relevant pool and in the
/// collection, with the `df_C / |C|` adjustment on both estimates:
///
/// ```text
/// p = (df_R + df_C/N) / (R + 1)
/// u = (df_C - df_R + df_C/N) / (N - R + 1)
/// w = ln(p (1 - u) / (u (1 - p)))
/// ```
pub fn prob_feedback_weight(df_rel: u32, rel_size: usize, df_coll: u32, num_docs: usize) -> f64 {
    let n = num_docs as f64;
    let r = rel_size as f64;
    let dfr = f64::from(df_rel);
    let dfc = f64::from(df_coll);
    let adj = dfc / n;
    let p = (dfr + adj) / (r + 1.0);
    let u = (dfc - dfr + adj) / (n - r + 1.0);
    (p * (1.0 - u) / (u * (1.0 - p))).ln()
}

/// Probabilistic relevance feedback: idf-like original query weights
/// `ln((N - df) / df)` interpolated with the `m` strongest feedback weights of terms in the
/// relevant pool. Scored downstream by dot product with MLE document vectors.
pub fn estimate_prob(
    index: &CollectionIndex,
    q0: &Topic,
    pools: &FeedbackPools,
    params: &FeedbackParams,
) -> Result<Estimate> {
    params.validate()?;
    let n = index.num_docs();
    let mut warnings = Vec::new();

    let mut original: BTreeMap<String, f64> = BTreeMap::new();
    for term in &q0.terms {
        if original.contains_key(term) {
            continue;
        }
        let df = index.df(term);
        if df == 0 {
            warnings.push(format!("query term {term:?} is not in the collection; dropped"));
            continue;
        }
        if df as usize >= n {
            warnings.push(format!("query term {term:?} occurs in every document; dropped"));
            continue;
        }
        original.insert(term.clone(), ((n - df as usize) as f64 / f64::from(df)).ln());
    }

    let relevant = pools.relevant();
    if relevant.is_empty() {
        let mut est = Estimate::fallback(QueryModel::vector(original)?);
        est.warnings = warnings;
        return Ok(est);
    }
    let mut df_rel: BTreeMap<u32, u32> = BTreeMap::new();
    for d in relevant {
        let docno = index.require_docno(d)?;
        for &(t, _) in index.doc_terms(docno) {
            *df_rel.entry(t).or_insert(0) += 1;
        }
    }
    let mut feedback: Vec<(String, f64)> = Vec::with_capacity(df_rel.len());
    for (&t, &dfr) in &df_rel {
        let w = prob_feedback_weight(dfr, relevant.len(), index.df_by_id(t), n);
        if w.is_finite() {
            feedback.push((index.term(t).to_string(), w));
        } else {
            warnings.push(format!("feedback weight of {:?} is not finite; dropped", index.term(t)));
        }
    }
    feedback.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    feedback.truncate(params.num_expansion_terms);
    let feedback: BTreeMap<String, f64> = feedback.into_iter().collect();

    let mixed = interpolate(params.interp_lambda, &original, &feedback);
    if mixed.is_empty() {
        warnings.push("no usable query or feedback weight; ranking with the original query".into());
        let mut est = Estimate::fallback(QueryModel::vector(original)?);
        est.warnings = warnings;
        return Ok(est);
    }
    Ok(Estimate {
        query: QueryModel::vector(mixed)?,
        fallback: false,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::TermSequence;
    use crate::index::build_index;

    /// 100 documents; "w" occurs in the first 10, "v" everywhere, "r" only in d000.
    fn hundred() -> CollectionIndex {
        build_index((0..100).map(|i| {
            let mut terms = vec!["v".to_string(), format!("u{i}")];
            if i < 10 {
                terms.push("w".into());
            }
            if i == 0 {
                terms.push("r".into());
            }
            TermSequence::new(format!("d{i:03}"), terms)
        }))
        .unwrap()
    }

    #[test]
    fn hand_worked_weight() {
        let w = prob_feedback_weight(2, 2, 10, 100);
        let p: f64 = 2.1 / 3.0;
        let u: f64 = 8.1 / 99.0;
        assert!((p - 0.7).abs() < 1e-12);
        assert!((w - (p * (1.0 - u) / (u * (1.0 - p))).ln()).abs() < 1e-12);
        assert!((w - 26.185_185_185_185_18f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn estimate_weights() {
        let idx = hundred();
        let q0 = Topic::new("q", ["w", "v", "missing"]);
        let pools = FeedbackPools::from_judgments([("d000", true), ("d001", true)]).unwrap();
        let p = FeedbackParams {
            interp_lambda: 0.0,
            num_expansion_terms: 50,
            ..Default::default()
        };
        let est = estimate_prob(&idx, &q0, &pools, &p).unwrap();
        assert!((est.query.weight("w") - prob_feedback_weight(2, 2, 10, 100)).abs() < 1e-12);
        // "v" is in every document: u = 1 and the weight is undefined.
        assert_eq!(est.query.weight("v"), 0.0);
        assert_eq!(est.warnings.len(), 3);
    }

    #[test]
    fn lambda_one_is_original_weights() {
        let idx = hundred();
        let q0 = Topic::new("q", ["w", "r"]);
        let pools = FeedbackPools::from_judgments([("d000", true)]).unwrap();
        let p = FeedbackParams {
            interp_lambda: 1.0,
            ..Default::default()
        };
        let est = estimate_prob(&idx, &q0, &pools, &p).unwrap();
        assert_eq!(est.query.len(), 2);
        assert!((est.query.weight("w") - (90.0f64 / 10.0).ln()).abs() < 1e-12);
        assert!((est.query.weight("r") - 99f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_relevant_pool_falls_back() {
        let idx = hundred();
        let q0 = Topic::new("q", ["w"]);
        let est = estimate_prob(&idx, &q0, &FeedbackPools::new(), &FeedbackParams::default()).unwrap();
        assert!(est.fallback);
    }

    #[test]
    fn truncates_feedback_terms() {
        let idx = hundred();
        let q0 = Topic::new("q", ["w"]);
        let pools = FeedbackPools::from_judgments([("d000", true)]).unwrap();
        let p = FeedbackParams {
            interp_lambda: 0.0,
            num_expansion_terms: 2,
            ..Default::default()
        };
        let est = estimate_prob(&idx, &q0, &pools, &p).unwrap();
        assert_eq!(est.query.len(), 2);
    }
}
