//! The judged-budget interaction loop and the freezing rank list it produces.

mod judge;
mod session;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus_io::Topic;
use crate::error::{Error, Result};
use crate::feedback::{Estimate, FeedbackModel, FeedbackPools};
use crate::index::CollectionIndex;
use crate::params::ModelParams;
use crate::ranking::{retrieve_initial, ScoredList};

pub use judge::{simulate_judgment, InteractiveJudge, Judge, ReplayJudge, SimulatedJudge, TranscriptEntry};
pub use session::{read_session_log, read_session_log_file, write_session_log, SessionRecord};

/// Number of top terms kept in a model summary.
const SUMMARY_TERMS: usize = 10;

/// `docs_per_iter` documents are judged in each of `iterations` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub docs_per_iter: usize,
    pub iterations: usize,
    pub final_depth: usize,
}

impl BudgetConfig {
    pub fn new(docs_per_iter: usize, iterations: usize) -> Result<Self> {
        let b = BudgetConfig {
            docs_per_iter,
            iterations,
            final_depth: 1000,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn with_final_depth(mut self, final_depth: usize) -> Result<Self> {
        self.final_depth = final_depth;
        self.validate()?;
        Ok(self)
    }

    pub fn total_judgments(&self) -> usize {
        self.docs_per_iter * self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        if self.docs_per_iter == 0 || self.iterations == 0 {
            return Err(Error::InvalidParameter(format!(
                "budget must have k >= 1 and n >= 1, got {}x{}",
                self.docs_per_iter, self.iterations
            )));
        }
        if self.final_depth < self.total_judgments() {
            return Err(Error::InvalidParameter(format!(
                "final_depth {} is smaller than the judgment budget {}",
                self.final_depth,
                self.total_judgments()
            )));
        }
        Ok(())
    }
}

/// What ranked the documents of one retrieval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: FeedbackModel,
    /// Ranked with the initial ranker on the original query.
    pub fallback: bool,
    pub top_terms: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ModelSummary {
    fn initial(model: FeedbackModel, q0: &Topic) -> Self {
        let query = crate::ranking::QueryModel::from_counts(&q0.terms);
        ModelSummary {
            model,
            fallback: true,
            top_terms: query.top_terms(SUMMARY_TERMS),
            warnings: Vec::new(),
        }
    }

    fn of(model: FeedbackModel, q0: &Topic, est: &Estimate) -> Self {
        if est.fallback {
            let mut s = Self::initial(model, q0);
            s.warnings = est.warnings.clone();
            return s;
        }
        ModelSummary {
            model,
            fallback: false,
            top_terms: est.query.top_terms(SUMMARY_TERMS),
            warnings: est.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Documents shown and judged, in display order.
    pub shown: Vec<String>,
    pub judgments: Vec<(String, bool)>,
    /// How many of the k slots could not be filled.
    pub shortfall: usize,
    /// The model that produced this iteration's ranking.
    pub model: ModelSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreezingRunList {
    pub query_id: String,
    /// Shown documents in the order they were shown.
    pub frozen: Vec<String>,
    /// Final retrieval with the shown documents removed.
    pub tail: Vec<String>,
    pub records: Vec<IterationRecord>,
    /// The model that produced the tail.
    pub final_model: ModelSummary,
    /// The judge ended the session early.
    pub aborted: bool,
}

impl FreezingRunList {
    /// Frozen prefix followed by the tail.
    pub fn ranking(&self) -> Vec<String> {
        self.frozen.iter().chain(&self.tail).cloned().collect()
    }

    pub fn judgments(&self) -> impl Iterator<Item = &(String, bool)> {
        self.records.iter().flat_map(|r| r.judgments.iter())
    }

    pub fn pools(&self) -> Result<FeedbackPools> {
        FeedbackPools::from_judgments(self.judgments().map(|(d, r)| (d.as_str(), *r)))
    }

    pub fn to_scored_list(&self) -> Result<ScoredList> {
        ScoredList::from_order(self.query_id.clone(), &self.ranking())
    }
}

/// Run one session: retrieve, show the top unshown documents, judge them, re-estimate, repeat.
/// A last retrieval with every judgment fills the tail up to `final_depth`.
pub fn run_irf<J: Judge>(
    index: &CollectionIndex,
    topic: &Topic,
    model: FeedbackModel,
    params: &ModelParams,
    budget: &BudgetConfig,
    judge: &mut J,
) -> Result<FreezingRunList> {
    params.validate()?;
    budget.validate()?;
    let k = budget.docs_per_iter;
    let mut pools = FeedbackPools::new();
    let mut shown_set: HashSet<String> = HashSet::new();
    let mut frozen = Vec::new();
    let mut records = Vec::new();
    let mut aborted = false;

    for iter in 1..=budget.iterations {
        let ranking = params.ranking.with_depth(k);
        let (hits, summary) = if iter == 1 {
            let hits = retrieve_initial(index, &topic.terms, model.initial_ranker(), &ranking, &shown_set)?;
            (hits, ModelSummary::initial(model, topic))
        } else {
            let est = model.estimate(index, topic, &pools, params)?;
            for w in &est.warnings {
                log::warn!("{}: {}", topic.query_id, w);
            }
            let hits = model.retrieve(index, topic, &est, &ranking, &shown_set)?;
            (hits, ModelSummary::of(model, topic, &est))
        };

        let mut record = IterationRecord {
            iter,
            shown: Vec::new(),
            judgments: Vec::new(),
            shortfall: k.saturating_sub(hits.len()),
            model: summary,
        };
        if record.shortfall > 0 {
            log::info!(
                "{}: iteration {} found {} of {} unshown documents",
                topic.query_id,
                iter,
                hits.len(),
                k
            );
        }
        for hit in hits.into_iter().take(k) {
            match judge.judge(index, &topic.query_id, &hit.doc_id)? {
                Some(rel) => {
                    pools.add(&hit.doc_id, rel)?;
                    shown_set.insert(hit.doc_id.clone());
                    frozen.push(hit.doc_id.clone());
                    record.shown.push(hit.doc_id.clone());
                    record.judgments.push((hit.doc_id, rel));
                }
                None => {
                    aborted = true;
                    break;
                }
            }
        }
        records.push(record);
        if aborted {
            break;
        }
    }

    let est = model.estimate(index, topic, &pools, params)?;
    for w in &est.warnings {
        log::warn!("{}: {}", topic.query_id, w);
    }
    let remaining = budget.final_depth.saturating_sub(frozen.len());
    let tail = if remaining == 0 {
        Vec::new()
    } else {
        model
            .retrieve(index, topic, &est, &params.ranking.with_depth(remaining), &shown_set)?
            .into_iter()
            .map(|h| h.doc_id)
            .collect()
    };

    Ok(FreezingRunList {
        query_id: topic.query_id.clone(),
        frozen,
        tail,
        records,
        final_model: ModelSummary::of(model, topic, &est),
        aborted,
    })
}
