use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a language-model query.
pub const LM_MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// A probability distribution over terms.
    Lm,
    /// Arbitrary real term weights.
    Vector,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lm => "lm",
            ModelKind::Vector => "vector",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weighted term representation of a query state.
///
/// Zero weights are never stored. Weights iterate in lexicographic term order, which makes
/// score accumulation independent of index construction order.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryModel {
    kind: ModelKind,
    weights: BTreeMap<String, f64>,
}

impl QueryModel {
    /// A language model; weights must be finite, non-negative and sum to one.
    pub fn lm(weights: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let weights: BTreeMap<String, f64> = weights.into_iter().filter(|(_, w)| *w != 0.0).collect();
        if let Some((t, w)) = weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "language model weight for {t:?} is {w}"
            )));
        }
        let mass: f64 = weights.values().sum();
        if (mass - 1.0).abs() > LM_MASS_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "language model mass is {mass}, expected 1"
            )));
        }
        Ok(QueryModel {
            kind: ModelKind::Lm,
            weights,
        })
    }

    /// A vector model; weights must be finite.
    pub fn vector(weights: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let weights: BTreeMap<String, f64> = weights.into_iter().filter(|(_, w)| *w != 0.0).collect();
        if let Some((t, w)) = weights.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("vector weight for {t:?} is {w}")));
        }
        Ok(QueryModel {
            kind: ModelKind::Vector,
            weights,
        })
    }

    /// Raw term counts `c(w, Q)` as a vector model.
    pub fn from_counts<S: AsRef<str>>(terms: &[S]) -> Self {
        let mut weights = BTreeMap::new();
        for t in terms {
            *weights.entry(t.as_ref().to_string()).or_insert(0.0) += 1.0;
        }
        QueryModel {
            kind: ModelKind::Vector,
            weights,
        }
    }

    /// Maximum-likelihood language model of a term sequence. Empty input yields an empty
    /// model.
    pub fn mle<S: AsRef<str>>(terms: &[S]) -> Self {
        let mut weights = BTreeMap::new();
        let n = terms.len() as f64;
        for t in terms {
            *weights.entry(t.as_ref().to_string()).or_insert(0.0) += 1.0;
        }
        for w in weights.values_mut() {
            *w /= n;
        }
        QueryModel {
            kind: ModelKind::Lm,
            weights,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn weight(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, &w)| (t.as_str(), w))
    }

    /// The `n` heaviest terms by absolute weight, ties broken by term.
    pub fn top_terms(&self, n: usize) -> Vec<(String, f64)> {
        let mut all: Vec<(String, f64)> = self.weights.iter().map(|(t, &w)| (t.clone(), w)).collect();
        all.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        all.truncate(n);
        all
    }

    pub(crate) fn require(&self, kind: ModelKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::ModelKind {
                expected: kind.name(),
                found: self.kind.name(),
            })
        }
    }
}
