use std::collections::HashSet;

use crate::error::{Error, Result};

/// Relevant and non-relevant judgments accumulated over a session, in judgment order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeedbackPools {
    relevant: Vec<String>,
    nonrelevant: Vec<String>,
    members: HashSet<String>,
}

impl FeedbackPools {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a judged document. A document can be judged only once.
    pub fn add(&mut self, doc_id: &str, relevant: bool) -> Result<()> {
        if !self.members.insert(doc_id.to_string()) {
            return Err(Error::AlreadyJudged(doc_id.to_string()));
        }
        if relevant {
            self.relevant.push(doc_id.to_string());
        } else {
            self.nonrelevant.push(doc_id.to_string());
        }
        Ok(())
    }

    pub fn from_judgments<'a>(judgments: impl IntoIterator<Item = (&'a str, bool)>) -> Result<Self> {
        let mut pools = FeedbackPools::new();
        for (d, r) in judgments {
            pools.add(d, r)?;
        }
        Ok(pools)
    }

    pub fn relevant(&self) -> &[String] {
        &self.relevant
    }

    pub fn nonrelevant(&self) -> &[String] {
        &self.nonrelevant
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.members.contains(doc_id)
    }

    pub fn len(&self) -> usize {
        self.relevant.len() + self.nonrelevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_and_ordered() {
        let mut p = FeedbackPools::new();
        p.add("d3", true).unwrap();
        p.add("d1", false).unwrap();
        p.add("d2", true).unwrap();
        assert_eq!(p.relevant(), ["d3", "d2"]);
        assert_eq!(p.nonrelevant(), ["d1"]);
        assert!(matches!(p.add("d1", true), Err(Error::AlreadyJudged(_))));
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn growth_is_monotone() {
        let mut p = FeedbackPools::new();
        let mut prev = p.clone();
        for (i, rel) in [true, false, false, true].into_iter().enumerate() {
            p.add(&format!("d{i}"), rel).unwrap();
            assert!(prev.relevant().iter().all(|d| p.relevant().contains(d)));
            assert!(prev.nonrelevant().iter().all(|d| p.nonrelevant().contains(d)));
            prev = p.clone();
        }
    }
}
