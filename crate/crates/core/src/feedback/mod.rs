//! Feedback estimators.
//!
//! Every estimator starts from the original query and the full judgment pools; none of them
//! reuses the previous iteration's query model.
//!
//! | model      | uses relevant pool | uses non-relevant pool  | output | scored by           |
//! |------------|--------------------|-------------------------|--------|---------------------|
//! | RM3        | averaged doc MLEs  | no                      | LM     | KL / Dirichlet      |
//! | Distill    | EM over counts     | inside the mixture only | LM     | KL / Dirichlet      |
//! | Rocchio    | BM25 centroid      | BM25 centroid           | vector | dot with BM25 docs  |
//! | Prob       | document freqs     | no                      | vector | dot with MLE docs   |

mod distill;
mod pools;
mod prob;
mod rm3;
mod rocchio;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_io::Topic;
use crate::error::{Error, Result};
use crate::index::CollectionIndex;
use crate::params::ModelParams;
use crate::ranking::{
    retrieve_dot, retrieve_initial, retrieve_kl, InitialRanker, QueryModel, RankingParams,
    ScoredDoc, Vectorizer,
};

pub use distill::{distill_em, estimate_distillation, mixture_log_likelihood, EmTrace, MixtureWeights};
pub use pools::FeedbackPools;
pub use prob::{estimate_prob, prob_feedback_weight};
pub use rm3::estimate_rm3;
pub use rocchio::estimate_rocchio;

/// How the non-relevant centroid enters the Rocchio update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonRelevantSign {
    /// `Q0 + beta * R - gamma * NR`, the conventional Rocchio form.
    #[default]
    Subtract,
    /// `Q0 + beta * R + gamma * NR`.
    Add,
}

impl NonRelevantSign {
    pub fn factor(self) -> f64 {
        match self {
            NonRelevantSign::Subtract => -1.0,
            NonRelevantSign::Add => 1.0,
        }
    }
}

impl FromStr for NonRelevantSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subtract" => Ok(NonRelevantSign::Subtract),
            "add" => Ok(NonRelevantSign::Add),
            other => Err(Error::InvalidParameter(format!("unknown gamma sign {other:?}"))),
        }
    }
}

impl fmt::Display for NonRelevantSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NonRelevantSign::Subtract => "subtract",
            NonRelevantSign::Add => "add",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackParams {
    /// Weight on the original query model.
    pub interp_lambda: f64,
    /// Number of expansion terms kept, `m`.
    pub num_expansion_terms: usize,
    /// Distillation weight of the non-relevant topic model.
    pub lambda1: f64,
    /// Distillation weight of the background model.
    pub lambda2: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_sign: NonRelevantSign,
    pub em_max_iters: usize,
    pub em_tol: f64,
}

impl Default for FeedbackParams {
    fn default() -> Self {
        FeedbackParams {
            interp_lambda: 0.5,
            num_expansion_terms: 20,
            lambda1: 0.2,
            lambda2: 0.2,
            beta: 1.0,
            gamma: 0.5,
            gamma_sign: NonRelevantSign::Subtract,
            em_max_iters: 50,
            em_tol: 1e-6,
        }
    }
}

impl FeedbackParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..=1.0).contains(&self.interp_lambda) {
            return bad(format!("interp_lambda must be in [0, 1], got {}", self.interp_lambda));
        }
        if self.num_expansion_terms == 0 {
            return bad("m must be >= 1".into());
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return bad(format!(
                "lambda1 and lambda2 must be >= 0, got {} and {}",
                self.lambda1, self.lambda2
            ));
        }
        if self.lambda1 + self.lambda2 >= 1.0 {
            return bad(format!(
                "lambda1 + lambda2 must be < 1, got {}",
                self.lambda1 + self.lambda2
            ));
        }
        if !(self.beta >= 0.0 && self.gamma >= 0.0 && self.beta.is_finite() && self.gamma.is_finite()) {
            return bad(format!(
                "beta and gamma must be finite and >= 0, got {} and {}",
                self.beta, self.gamma
            ));
        }
        if !(self.em_tol >= 0.0) {
            return bad(format!("em_tol must be >= 0, got {}", self.em_tol));
        }
        Ok(())
    }
}

/// Result of a feedback estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub query: QueryModel,
    /// The model could not use feedback (e.g. no relevant document yet) and callers should
    /// rank with the initial ranker on the original query.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

impl Estimate {
    fn model(query: QueryModel) -> Self {
        Estimate {
            query,
            fallback: false,
            warnings: Vec::new(),
        }
    }

    fn fallback(query: QueryModel) -> Self {
        Estimate {
            query,
            fallback: true,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackModel {
    Rm3,
    Distill,
    Rocchio,
    Prob,
}

impl FeedbackModel {
    pub const ALL: [FeedbackModel; 4] = [
        FeedbackModel::Rm3,
        FeedbackModel::Distill,
        FeedbackModel::Rocchio,
        FeedbackModel::Prob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeedbackModel::Rm3 => "rm3",
            FeedbackModel::Distill => "distill",
            FeedbackModel::Rocchio => "rocchio",
            FeedbackModel::Prob => "prob",
        }
    }

    /// QL for the language-model family, BM25 for Rocchio and Prob.
    pub fn initial_ranker(self) -> InitialRanker {
        match self {
            FeedbackModel::Rm3 | FeedbackModel::Distill => InitialRanker::Ql,
            FeedbackModel::Rocchio | FeedbackModel::Prob => InitialRanker::Bm25,
        }
    }

    pub fn estimate(
        self,
        index: &CollectionIndex,
        q0: &Topic,
        pools: &FeedbackPools,
        params: &ModelParams,
    ) -> Result<Estimate> {
        match self {
            FeedbackModel::Rm3 => estimate_rm3(index, q0, pools, &params.feedback),
            FeedbackModel::Distill => estimate_distillation(index, q0, pools, &params.feedback),
            FeedbackModel::Rocchio => {
                estimate_rocchio(index, q0, pools, &params.feedback, &params.ranking)
            }
            FeedbackModel::Prob => estimate_prob(index, q0, pools, &params.feedback),
        }
    }

    /// Rank with an estimate, or with the initial ranker when the estimate fell back.
    pub fn retrieve(
        self,
        index: &CollectionIndex,
        q0: &Topic,
        estimate: &Estimate,
        params: &RankingParams,
        exclude: &HashSet<String>,
    ) -> Result<Vec<ScoredDoc>> {
        if estimate.fallback {
            return retrieve_initial(index, &q0.terms, self.initial_ranker(), params, exclude);
        }
        match self {
            FeedbackModel::Rm3 | FeedbackModel::Distill => {
                retrieve_kl(index, &estimate.query, params, exclude)
            }
            FeedbackModel::Rocchio => {
                retrieve_dot(index, &estimate.query, Vectorizer::Bm25, params, exclude)
            }
            FeedbackModel::Prob => retrieve_dot(index, &estimate.query, Vectorizer::Mle, params, exclude),
        }
    }
}

impl fmt::Display for FeedbackModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeedbackModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rm3" => Ok(FeedbackModel::Rm3),
            "distill" | "distillation" => Ok(FeedbackModel::Distill),
            "rocchio" => Ok(FeedbackModel::Rocchio),
            "prob" => Ok(FeedbackModel::Prob),
            other => Err(Error::InvalidParameter(format!("unknown feedback model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MleMode {
    /// Mean of per-document MLEs.
    Averaged,
    /// MLE of the concatenated documents.
    Concatenated,
}

/// Unigram maximum-likelihood model of a document set.
///
/// Documents without terms carry no distribution and are skipped in averaged mode.
pub fn mle(index: &CollectionIndex, doc_ids: &[String], mode: MleMode) -> Result<BTreeMap<String, f64>> {
    if doc_ids.is_empty() {
        return Err(Error::EmptyDocumentSet);
    }
    let docnos = doc_ids
        .iter()
        .map(|d| index.require_docno(d))
        .collect::<Result<Vec<_>>>()?;
    let mut dist: BTreeMap<String, f64> = BTreeMap::new();
    match mode {
        MleMode::Averaged => {
            let nonempty: Vec<_> = docnos.iter().filter(|&&d| index.doc_len(d) > 0).collect();
            let n = nonempty.len() as f64;
            for &&d in &nonempty {
                let len = f64::from(index.doc_len(d));
                for &(t, c) in index.doc_terms(d) {
                    *dist.entry(index.term(t).to_string()).or_insert(0.0) += f64::from(c) / len / n;
                }
            }
        }
        MleMode::Concatenated => {
            let total: f64 = docnos.iter().map(|&d| f64::from(index.doc_len(d))).sum();
            for &d in &docnos {
                for &(t, c) in index.doc_terms(d) {
                    *dist.entry(index.term(t).to_string()).or_insert(0.0) += f64::from(c) / total;
                }
            }
        }
    }
    if dist.is_empty() {
        return Err(Error::EmptyDocumentSet);
    }
    Ok(dist)
}

/// Terms ordered by descending weight, ties by term.
fn ranked(weights: &BTreeMap<String, f64>) -> Vec<(&String, f64)> {
    let mut v: Vec<(&String, f64)> = weights.iter().map(|(t, &w)| (t, w)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v
}

/// Keep the `m` heaviest terms of a distribution and renormalize.
pub(crate) fn truncate_distribution(dist: &BTreeMap<String, f64>, m: usize) -> BTreeMap<String, f64> {
    let kept: Vec<(&String, f64)> = ranked(dist).into_iter().filter(|(_, w)| *w > 0.0).take(m).collect();
    let mass: f64 = kept.iter().map(|(_, w)| w).sum();
    kept.into_iter().map(|(t, w)| (t.clone(), w / mass)).collect()
}

/// `lambda * original + (1 - lambda) * feedback`, term-wise.
pub(crate) fn interpolate(
    lambda: f64,
    original: &BTreeMap<String, f64>,
    feedback: &BTreeMap<String, f64>,
) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for (t, &w) in original {
        *out.entry(t.clone()).or_insert(0.0) += lambda * w;
    }
    for (t, &w) in feedback {
        *out.entry(t.clone()).or_insert(0.0) += (1.0 - lambda) * w;
    }
    out.retain(|_, w| *w != 0.0);
    out
}
