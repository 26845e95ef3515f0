//! Effectiveness metrics, significance testing and cross-validated parameter selection.

mod cv;
mod report;
mod significance;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_io::QrelSet;
use crate::error::{Error, Result};
use crate::ranking::RunSet;

pub use cv::{cross_validate, fold_assignment, CvFold, CvResult, GridSpec, PointScores};
pub use report::{write_cv_report, write_metrics_tsv, write_significance_tsv};
pub use significance::{
    fisher_randomization, randomization_exact, randomization_monte_carlo, SigTestResult, EXACT_MAX_QUERIES,
};

pub const MAP_CUTOFF: usize = 1000;
pub const NDCG_DEPTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Map,
    Ndcg20,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Map, Metric::Ndcg20];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Map => "map",
            Metric::Ndcg20 => "ndcg20",
        }
    }

    /// Score one query's ranking.
    pub fn score(self, run: &[String], qrels: &QrelSet, query_id: &str) -> f64 {
        match self {
            Metric::Map => average_precision(run, qrels, query_id, MAP_CUTOFF),
            Metric::Ndcg20 => ndcg_at_20(run, qrels, query_id),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map" => Ok(Metric::Map),
            "ndcg20" | "ndcg@20" | "ndcg_cut_20" => Ok(Metric::Ndcg20),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Repeated document ids count only at their first rank.
fn dedup(run: &[String]) -> impl Iterator<Item = &String> {
    let mut seen = HashSet::new();
    run.iter().filter(move |d| seen.insert(d.as_str()))
}

/// Average precision over the first `cutoff` ranks, normalized by the number of relevant
/// documents in the qrels. 0 when the query has no relevant document.
pub fn average_precision(run: &[String], qrels: &QrelSet, query_id: &str, cutoff: usize) -> f64 {
    let r = qrels.num_relevant(query_id);
    if r == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in dedup(run).take(cutoff).enumerate() {
        if qrels.is_relevant(query_id, doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / r as f64
}

/// NDCG at `depth` with the raw grade as gain and a log2(rank + 1) discount.
pub fn ndcg_at(run: &[String], qrels: &QrelSet, query_id: &str, depth: usize) -> f64 {
    let Some(judged) = qrels.for_query(query_id) else {
        return 0.0;
    };
    let mut ideal: Vec<u32> = judged.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(ideal.into_iter().take(depth));
    if idcg == 0.0 {
        return 0.0;
    }
    let gains = dedup(run)
        .take(depth)
        .map(|d| qrels.grade(query_id, d).unwrap_or(0));
    dcg(gains) / idcg
}

pub fn ndcg_at_20(run: &[String], qrels: &QrelSet, query_id: &str) -> f64 {
    ndcg_at(run, qrels, query_id, NDCG_DEPTH)
}

fn dcg(gains: impl Iterator<Item = u32>) -> f64 {
    gains
        .enumerate()
        .map(|(i, g)| g as f64 / ((i + 2) as f64).log2())
        .sum()
}

/// Per-query values and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: Metric,
    pub per_query: BTreeMap<String, f64>,
    pub mean: f64,
}

impl MetricResult {
    pub fn from_per_query(metric: Metric, per_query: BTreeMap<String, f64>) -> Self {
        let mean = mean(per_query.values().copied());
        MetricResult {
            metric,
            per_query,
            mean,
        }
    }
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Evaluate every query that appears in the run and has at least one relevant document.
pub fn evaluate(runs: &RunSet, qrels: &QrelSet, metric: Metric) -> MetricResult {
    let per_query = runs
        .iter()
        .filter(|(q, _)| qrels.num_relevant(q) > 0)
        .map(|(q, docs)| (q.clone(), metric.score(docs, qrels, q)))
        .collect();
    MetricResult::from_per_query(metric, per_query)
}

pub fn evaluate_all(runs: &RunSet, qrels: &QrelSet) -> Vec<MetricResult> {
    Metric::ALL.iter().map(|&m| evaluate(runs, qrels, m)).collect()
}
