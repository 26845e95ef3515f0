//! Tunable parameters and their flat `key=value` file format.
//!
//! ```text
//! # comments and blank lines are ignored
//! mu=1000
//! k1=1.2
//! b=0.75
//! interp_lambda=0.5
//! m=20
//! lambda1=0.2
//! lambda2=0.2
//! beta=1
//! gamma=0.5
//! gamma_sign=subtract
//! em_max_iters=50
//! em_tol=1e-6
//! ```
//!
//! Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::FeedbackParams;
use crate::ranking::RankingParams;

pub const KEYS: &[&str] = &[
    "mu",
    "k1",
    "b",
    "interp_lambda",
    "m",
    "lambda1",
    "lambda2",
    "beta",
    "gamma",
    "gamma_sign",
    "em_max_iters",
    "em_tol",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub ranking: RankingParams,
    pub feedback: FeedbackParams,
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.ranking.validate()?;
        self.feedback.validate()
    }

    /// Set one parameter by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "mu" => self.ranking.mu = num(key, value)?,
            "k1" => self.ranking.k1 = num(key, value)?,
            "b" => self.ranking.b = num(key, value)?,
            "interp_lambda" => self.feedback.interp_lambda = num(key, value)?,
            "m" => self.feedback.num_expansion_terms = num(key, value)?,
            "lambda1" => self.feedback.lambda1 = num(key, value)?,
            "lambda2" => self.feedback.lambda2 = num(key, value)?,
            "beta" => self.feedback.beta = num(key, value)?,
            "gamma" => self.feedback.gamma = num(key, value)?,
            "gamma_sign" => self.feedback.gamma_sign = value.parse()?,
            "em_max_iters" => self.feedback.em_max_iters = num(key, value)?,
            "em_tol" => self.feedback.em_tol = num(key, value)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown parameter {other:?} (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "mu" => self.ranking.mu.to_string(),
            "k1" => self.ranking.k1.to_string(),
            "b" => self.ranking.b.to_string(),
            "interp_lambda" => self.feedback.interp_lambda.to_string(),
            "m" => self.feedback.num_expansion_terms.to_string(),
            "lambda1" => self.feedback.lambda1.to_string(),
            "lambda2" => self.feedback.lambda2.to_string(),
            "beta" => self.feedback.beta.to_string(),
            "gamma" => self.feedback.gamma.to_string(),
            "gamma_sign" => self.feedback.gamma_sign.to_string(),
            "em_max_iters" => self.feedback.em_max_iters.to_string(),
            "em_tol" => self.feedback.em_tol.to_string(),
            _ => return None,
        })
    }

    /// Apply `key=value` lines on top of the current values.
    pub fn apply_kv(&mut self, text: &str, source_name: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(source_name, i + 1, "expected key=value"));
            };
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str, source_name: &str) -> Result<Self> {
        let mut p = ModelParams::default();
        p.apply_kv(text, source_name)?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv(&text, &path.display().to_string())
    }

    /// Every parameter as `key=value`, one per line, in [`KEYS`] order.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key).unwrap_or_default());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::NonRelevantSign;

    #[test]
    fn parse_and_echo() {
        let p = ModelParams::from_kv("# tuned\nmu=300\nm = 30\ngamma_sign=add\n\nem_tol=1e-8\n", "p").unwrap();
        assert_eq!(p.ranking.mu, 300.0);
        assert_eq!(p.feedback.num_expansion_terms, 30);
        assert_eq!(p.feedback.gamma_sign, NonRelevantSign::Add);
        let back = ModelParams::from_kv(&p.to_kv(), "echo").unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ModelParams::from_kv("mu=300\nalpha=1\n", "p").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn malformed_lines() {
        assert!(ModelParams::from_kv("mu", "p").is_err());
        assert!(ModelParams::from_kv("mu=abc", "p").is_err());
    }

    #[test]
    fn every_key_round_trips() {
        let p = ModelParams::default();
        for key in KEYS {
            let mut q = ModelParams::default();
            q.set(key, &p.get(key).unwrap()).unwrap();
            assert_eq!(q, p);
        }
    }
}
