use super::{interpolate, mle, truncate_distribution, Estimate, FeedbackParams, FeedbackPools, MleMode};
use crate::corpus_io::Topic;
use crate::error::{Error, Result};
use crate::index::CollectionIndex;
use crate::ranking::QueryModel;

/// Relevance model from true relevance feedback: the mean of the relevant documents'
/// MLEs, cut to `m` terms and interpolated with the original query MLE.
///
/// With no relevant documents (or only empty ones) the original query MLE is returned with
/// `fallback` set.
pub fn estimate_rm3(
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
    let relevance = match mle(index, pools.relevant(), MleMode::Averaged) {
        Ok(d) => d,
        Err(Error::EmptyDocumentSet) => return Ok(Estimate::fallback(original)),
        Err(e) => return Err(e),
    };
    let relevance = truncate_distribution(&relevance, params.num_expansion_terms);
    let mixed = interpolate(params.interp_lambda, original.weights(), &relevance);
    Ok(Estimate::model(QueryModel::lm(mixed)?))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    fn params(lambda: f64) -> FeedbackParams {
        FeedbackParams {
            interp_lambda: lambda,
            num_expansion_terms: 10,
            ..Default::default()
        }
    }

    fn pools(rel: &[&str]) -> FeedbackPools {
        FeedbackPools::from_judgments(rel.iter().map(|d| (*d, true))).unwrap()
    }

    #[test]
    fn lambda_one_is_original_query() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let est = estimate_rm3(&idx, &q0, &pools(&["D1"]), &params(1.0)).unwrap();
        assert_eq!(est.query, QueryModel::mle(&["b"]));
        assert!(!est.fallback);
    }

    #[test]
    fn hand_worked_mixture() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let est = estimate_rm3(&idx, &q0, &pools(&["D1"]), &params(0.5)).unwrap();
        assert!((est.query.weight("a") - 1.0 / 3.0).abs() < 1e-12);
        assert!((est.query.weight("b") - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_zero_is_averaged_mle() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let est = estimate_rm3(&idx, &q0, &pools(&["D1", "D2"]), &params(0.0)).unwrap();
        assert!((est.query.weight("a") - 1.0 / 3.0).abs() < 1e-12);
        assert!((est.query.weight("b") - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_falls_back() {
        let idx = toy();
        let q0 = Topic::new("q", ["a", "b"]);
        let p = FeedbackPools::from_judgments([("D2", false)]).unwrap();
        let est = estimate_rm3(&idx, &q0, &p, &params(0.3)).unwrap();
        assert!(est.fallback);
        assert_eq!(est.query, QueryModel::mle(&["a", "b"]));
    }

    #[test]
    fn ignores_nonrelevant_pool() {
        let idx = toy();
        let q0 = Topic::new("q", ["b"]);
        let mut with_nr = pools(&["D1"]);
        with_nr.add("D2", false).unwrap();
        let a = estimate_rm3(&idx, &q0, &pools(&["D1"]), &params(0.4)).unwrap();
        let b = estimate_rm3(&idx, &q0, &with_nr, &params(0.4)).unwrap();
        assert_eq!(a, b);
    }
}
