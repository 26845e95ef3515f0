//! Distillation: a three-component mixture over the words of the relevant documents,
//! separating a relevance model from the non-relevant-pool model and the corpus model.
//! With `lambda1 = 0` it is the two-component mixture feedback model.

use std::collections::BTreeMap;

use super::{interpolate, mle, truncate_distribution, Estimate, FeedbackParams, FeedbackPools, MleMode};
use crate::corpus_io::Topic;
use crate::error::{Error, Result};
use crate::index::CollectionIndex;
use crate::ranking::QueryModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureWeights {
    pub relevant: f64,
    pub nonrelevant: f64,
    pub background: f64,
}

impl MixtureWeights {
    /// `(1 - l1 - l2, l1, l2)`. Without a non-relevant model the `l1` share is dropped and
    /// the remaining two weights rescaled to sum to one.
    pub fn new(lambda1: f64, lambda2: f64, has_nonrelevant: bool) -> Self {
        let relevant = 1.0 - lambda1 - lambda2;
        if has_nonrelevant {
            MixtureWeights {
                relevant,
                nonrelevant: lambda1,
                background: lambda2,
            }
        } else {
            let rest = 1.0 - lambda1;
            MixtureWeights {
                relevant: relevant / rest,
                nonrelevant: 0.0,
                background: lambda2 / rest,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    pub p_rel: Vec<f64>,
    /// Objective before the first step and after every step.
    pub log_likelihoods: Vec<f64>,
}

/// `sum_w c(w) ln(a_r p_rel(w) + a_n p_nr(w) + a_b p_bg(w))`.
pub fn mixture_log_likelihood(
    counts: &[f64],
    p_rel: &[f64],
    p_nr: &[f64],
    p_bg: &[f64],
    weights: MixtureWeights,
) -> f64 {
    (0..counts.len())
        .map(|i| {
            let mix = weights.relevant * p_rel[i] + weights.nonrelevant * p_nr[i] + weights.background * p_bg[i];
            counts[i] * mix.ln()
        })
        .sum()
}

/// Maximize the mixture likelihood over `p_rel` with EM, starting from `init`.
///
/// Stops after `max_iters` steps or once a step gains less than `tol`.
pub fn distill_em(
    counts: &[f64],
    p_nr: &[f64],
    p_bg: &[f64],
    weights: MixtureWeights,
    init: &[f64],
    max_iters: usize,
    tol: f64,
) -> EmTrace {
    let mut p = init.to_vec();
    let mut ll = mixture_log_likelihood(counts, &p, p_nr, p_bg, weights);
    let mut trace = vec![ll];
    let mut expected = vec![0.0; counts.len()];
    for _ in 0..max_iters {
        let mut total = 0.0;
        for i in 0..counts.len() {
            let rel = weights.relevant * p[i];
            let mix = rel + weights.nonrelevant * p_nr[i] + weights.background * p_bg[i];
            expected[i] = if mix > 0.0 { counts[i] * rel / mix } else { 0.0 };
            total += expected[i];
        }
        if total <= 0.0 {
            break;
        }
        for i in 0..counts.len() {
            p[i] = expected[i] / total;
        }
        let next = mixture_log_likelihood(counts, &p, p_nr, p_bg, weights);
        trace.push(next);
        let gain = next - ll;
        ll = next;
        if gain < tol {
            break;
        }
    }
    EmTrace {
        p_rel: p,
        log_likelihoods: trace,
    }
}

pub fn estimate_distillation(
    index: &CollectionIndex,
    q0: &Topic,
    pools: &FeedbackPools,
    params: &FeedbackParams,
) -> Result<Estimate> {
    params.validate()?;
    let original = QueryModel::mle(&q0.terms);
    if pools.relevant().is_empty() {
        return Ok(Estimate::fallback(original));
    }
    let relevant = match mle(index, pools.relevant(), MleMode::Concatenated) {
        Ok(d) => d,
        Err(Error::EmptyDocumentSet) => return Ok(Estimate::fallback(original)),
        Err(e) => return Err(e),
    };
    let nonrelevant = if pools.nonrelevant().is_empty() {
        None
    } else {
        match mle(index, pools.nonrelevant(), MleMode::Concatenated) {
            Ok(d) => Some(d),
            Err(Error::EmptyDocumentSet) => None,
            Err(e) => return Err(e),
        }
    };

    // Concatenated counts of the relevant pool.
    let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
    for d in pools.relevant() {
        let docno = index.require_docno(d)?;
        for &(t, c) in index.doc_terms(docno) {
            *counts.entry(index.term(t)).or_insert(0.0) += f64::from(c);
        }
    }
    let terms: Vec<&str> = counts.keys().copied().collect();
    let c: Vec<f64> = counts.values().copied().collect();
    let total = index.total_terms() as f64;
    let p_bg: Vec<f64> = terms.iter().map(|t| index.cf(t) as f64 / total).collect();
    let p_nr: Vec<f64> = terms
        .iter()
        .map(|t| nonrelevant.as_ref().and_then(|m| m.get(*t)).copied().unwrap_or(0.0))
        .collect();
    let init: Vec<f64> = terms.iter().map(|t| relevant[*t]).collect();
    let weights = MixtureWeights::new(params.lambda1, params.lambda2, nonrelevant.is_some());

    let trace = distill_em(&c, &p_nr, &p_bg, weights, &init, params.em_max_iters, params.em_tol);
    let p_rel: BTreeMap<String, f64> = terms
        .iter()
        .zip(&trace.p_rel)
        .filter(|(_, &p)| p > 0.0)
        .map(|(t, &p)| (t.to_string(), p))
        .collect();
    if p_rel.is_empty() {
        return Ok(Estimate::fallback(original));
    }
    let p_rel = truncate_distribution(&p_rel, params.num_expansion_terms);
    let mixed = interpolate(params.interp_lambda, original.weights(), &p_rel);
    Ok(Estimate::model(QueryModel::lm(mixed)?))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    /// Grid maximization of the two-term objective over p_rel(b), step 1e-4.
    fn grid_argmax(counts: [f64; 2], p_bg: [f64; 2], w: MixtureWeights) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=10_000 {
            let pb = i as f64 * 1e-4;
            let ll = mixture_log_likelihood(&counts, &[1.0 - pb, pb], &[0.0, 0.0], &p_bg, w);
            if ll > best.0 {
                best = (ll, pb);
            }
        }
        best.1
    }

    #[test]
    fn two_term_mixture_matches_grid() {
        let w = MixtureWeights::new(0.0, 0.5, false);
        let counts = [2.0, 2.0];
        let p_bg = [0.9, 0.1];
        let oracle_b = grid_argmax(counts, p_bg, w);
        assert!((oracle_b - 0.9).abs() < 1e-9);
        let trace = distill_em(&counts, &[0.0, 0.0], &p_bg, w, &[0.5, 0.5], 500, 1e-12);
        assert!((trace.p_rel[1] - oracle_b).abs() < 1e-3);
        assert!(trace.p_rel[1] > 0.5, "mass should move toward b");
    }

    #[test]
    fn degenerate_mixture_is_concatenated_mle() {
        let w = MixtureWeights::new(0.0, 0.0, false);
        let counts = [3.0, 1.0, 4.0];
        let init = [3.0 / 8.0, 1.0 / 8.0, 4.0 / 8.0];
        let trace = distill_em(&counts, &[0.0; 3], &[0.2, 0.3, 0.5], w, &init, 50, 1e-6);
        for (p, q) in trace.p_rel.iter().zip(init) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn likelihood_never_decreases() {
        let w = MixtureWeights::new(0.3, 0.4, true);
        let counts = [5.0, 1.0, 2.0, 7.0];
        let p_nr = [0.1, 0.6, 0.3, 0.0];
        let p_bg = [0.4, 0.3, 0.2, 0.1];
        let init = [5.0 / 15.0, 1.0 / 15.0, 2.0 / 15.0, 7.0 / 15.0];
        let trace = distill_em(&counts, &p_nr, &p_bg, w, &init, 200, 0.0);
        for pair in trace.log_likelihoods.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9);
        }
    }

    #[test]
    fn weights_without_nonrelevant_pool() {
        let w = MixtureWeights::new(0.2, 0.4, false);
        assert!((w.relevant - 0.5).abs() < 1e-12);
        assert!((w.background - 0.5).abs() < 1e-12);
        assert_eq!(w.nonrelevant, 0.0);
    }

    #[test]
    fn estimate_is_a_distribution() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let pools = FeedbackPools::from_judgments([("D1", true), ("D2", false)]).unwrap();
        let est = estimate_distillation(&idx, &q0, &pools, &FeedbackParams::default()).unwrap();
        assert!(!est.fallback);
        let mass: f64 = est.query.weights().values().sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_lambdas() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let pools = FeedbackPools::from_judgments([("D1", true)]).unwrap();
        let p = FeedbackParams {
            lambda1: 0.5,
            lambda2: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            estimate_distillation(&idx, &q0, &pools, &p),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn zero_lambdas_reduce_to_concatenated_mle() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let pools = FeedbackPools::from_judgments([("D1", true), ("D2", true)]).unwrap();
        let p = FeedbackParams {
            lambda1: 0.0,
            lambda2: 0.0,
            interp_lambda: 0.0,
            ..Default::default()
        };
        let est = estimate_distillation(&idx, &q0, &pools, &p).unwrap();
        assert!((est.query.weight("a") - 0.5).abs() < 1e-12);
        assert!((est.query.weight("b") - 0.5).abs() < 1e-12);
    }
}
