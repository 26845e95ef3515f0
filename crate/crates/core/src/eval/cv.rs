use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::FeedbackModel;
use crate::params::ModelParams;

use super::mean;

/// Value lists for each tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub mu: Vec<f64>,
    pub k1: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub interp_lambda: Vec<f64>,
    pub num_expansion_terms: Vec<usize>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        let unit = vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let half = vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        GridSpec {
            mu: vec![30.0, 50.0, 300.0, 500.0, 1000.0, 1500.0],
            k1: vec![1.2, 1.4, 1.6, 1.8, 2.0],
            b: vec![0.75],
            lambda1: unit.clone(),
            lambda2: unit.clone(),
            interp_lambda: unit,
            num_expansion_terms: vec![10, 20, 30, 40, 50],
            beta: half.clone(),
            gamma: half,
        }
    }
}

impl GridSpec {
    /// A grid holding exactly the values of `p`.
    pub fn singleton(p: &ModelParams) -> Self {
        GridSpec {
            mu: vec![p.ranking.mu],
            k1: vec![p.ranking.k1],
            b: vec![p.ranking.b],
            lambda1: vec![p.feedback.lambda1],
            lambda2: vec![p.feedback.lambda2],
            interp_lambda: vec![p.feedback.interp_lambda],
            num_expansion_terms: vec![p.feedback.num_expansion_terms],
            beta: vec![p.feedback.beta],
            gamma: vec![p.feedback.gamma],
        }
    }

    /// Replace the values of one parameter from a comma-separated list.
    pub fn set(&mut self, key: &str, values: &str) -> Result<()> {
        fn list<T: std::str::FromStr>(key: &str, values: &str) -> Result<Vec<T>> {
            values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {v:?}")))
                })
                .collect()
        }
        match key {
            "mu" => self.mu = list(key, values)?,
            "k1" => self.k1 = list(key, values)?,
            "b" => self.b = list(key, values)?,
            "lambda1" => self.lambda1 = list(key, values)?,
            "lambda2" => self.lambda2 = list(key, values)?,
            "interp_lambda" => self.interp_lambda = list(key, values)?,
            "num_expansion_terms" => self.num_expansion_terms = list(key, values)?,
            "beta" => self.beta = list(key, values)?,
            "gamma" => self.gamma = list(key, values)?,
            other => return Err(Error::InvalidParameter(format!("unknown grid parameter {other:?}"))),
        }
        Ok(())
    }

    /// Every valid combination of the parameters `model` uses; the rest come from `base`.
    /// Distillation points with lambda1 + lambda2 >= 1 are skipped.
    pub fn points(&self, model: FeedbackModel, base: &ModelParams) -> Result<Vec<ModelParams>> {
        let mut out = vec![*base];
        let expand = |out: Vec<ModelParams>, vals: &[f64], set: fn(&mut ModelParams, f64)| -> Vec<ModelParams> {
            out.iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = *p;
                        set(&mut q, v);
                        q
                    })
                })
                .collect()
        };
        let m: Vec<f64> = self.num_expansion_terms.iter().map(|&m| m as f64).collect();
        match model {
            FeedbackModel::Rm3 | FeedbackModel::Distill => {
                out = expand(out, &self.mu, |p, v| p.ranking.mu = v);
            }
            FeedbackModel::Rocchio | FeedbackModel::Prob => {
                out = expand(out, &self.k1, |p, v| p.ranking.k1 = v);
                out = expand(out, &self.b, |p, v| p.ranking.b = v);
            }
        }
        out = expand(out, &m, |p, v| p.feedback.num_expansion_terms = v as usize);
        match model {
            FeedbackModel::Rm3 | FeedbackModel::Prob => {
                out = expand(out, &self.interp_lambda, |p, v| p.feedback.interp_lambda = v);
            }
            FeedbackModel::Distill => {
                out = expand(out, &self.lambda1, |p, v| p.feedback.lambda1 = v);
                out = expand(out, &self.lambda2, |p, v| p.feedback.lambda2 = v);
                out = expand(out, &self.interp_lambda, |p, v| p.feedback.interp_lambda = v);
                out.retain(|p| p.feedback.lambda1 + p.feedback.lambda2 < 1.0);
            }
            FeedbackModel::Rocchio => {
                out = expand(out, &self.beta, |p, v| p.feedback.beta = v);
                out = expand(out, &self.gamma, |p, v| p.feedback.gamma = v);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter(format!("empty parameter grid for {model}")));
        }
        for p in &out {
            p.validate()?;
        }
        Ok(out)
    }
}

/// Per-query scores of one grid point. MAP is the selection objective.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointScores {
    pub map: BTreeMap<String, f64>,
    pub ndcg20: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvFold {
    pub test_queries: Vec<String>,
    /// Index of the selected grid point.
    pub best_point: usize,
    pub train_map: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub folds: Vec<CvFold>,
    /// Held-out scores, each under its own fold's selection.
    pub pooled: PointScores,
    pub mean_map: f64,
    pub mean_ndcg20: f64,
}

/// Sort query ids and deal them round-robin into `folds` folds.
pub fn fold_assignment(query_ids: &[String], folds: usize) -> Vec<Vec<String>> {
    let mut ids = query_ids.to_vec();
    ids.sort();
    ids.dedup();
    let mut out = vec![Vec::new(); folds];
    for (i, q) in ids.into_iter().enumerate() {
        out[i % folds].push(q);
    }
    out
}

/// Grid search with k-fold cross-validation. `evaluate(i)` scores grid point `i` on every query;
/// a fold's choice maximizes mean MAP over the other folds' queries, ties going to the earlier point.
pub fn cross_validate<F>(query_ids: &[String], num_points: usize, folds: usize, evaluate: F) -> Result<CvResult>
where
    F: Fn(usize) -> Result<PointScores> + Sync,
{
    if num_points == 0 {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    let assignment = fold_assignment(query_ids, folds);
    let total: usize = assignment.iter().map(Vec::len).sum();
    if total < folds {
        return Err(Error::InvalidParameter(format!(
            "{folds}-fold cross-validation needs at least {folds} topics, got {total}"
        )));
    }
    let scores: Vec<PointScores> = (0..num_points).into_par_iter().map(&evaluate).collect::<Result<_>>()?;

    let mut result_folds = Vec::with_capacity(folds);
    let mut pooled = PointScores::default();
    for (f, test) in assignment.iter().enumerate() {
        let train: Vec<&String> = assignment
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, qs)| qs)
            .collect();
        let mut best = 0;
        let mut best_map = f64::NEG_INFINITY;
        for (i, s) in scores.iter().enumerate() {
            let m = mean(train.iter().filter_map(|q| s.map.get(*q).copied()));
            if m > best_map {
                best = i;
                best_map = m;
            }
        }
        for q in test {
            if let Some(&v) = scores[best].map.get(q) {
                pooled.map.insert(q.clone(), v);
            }
            if let Some(&v) = scores[best].ndcg20.get(q) {
                pooled.ndcg20.insert(q.clone(), v);
            }
        }
        result_folds.push(CvFold {
            test_queries: test.clone(),
            best_point: best,
            train_map: best_map,
        });
    }
    Ok(CvResult {
        folds: result_folds,
        mean_map: mean(pooled.map.values().copied()),
        mean_ndcg20: mean(pooled.ndcg20.values().copied()),
        pooled,
    })
}
