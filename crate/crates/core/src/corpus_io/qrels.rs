use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Graded relevance judgments keyed by query id, then document id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
    duplicates: usize,
}

impl QrelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a judgment, overwriting any earlier grade for the pair. Returns `true` when
    /// an earlier grade was replaced.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u32) -> bool {
        let replaced = self
            .judgments
            .entry(query_id.to_string())
            .or_default()
            .insert(doc_id.to_string(), grade)
            .is_some();
        if replaced {
            self.duplicates += 1;
        }
        replaced
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<u32> {
        self.judgments.get(query_id)?.get(doc_id).copied()
    }

    /// Binary relevance: grade >= 1. Unjudged pairs are non-relevant.
    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id).is_some_and(|g| g >= 1)
    }

    pub fn for_query(&self, query_id: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(query_id)
    }

    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.for_query(query_id)
            .map_or(0, |m| m.values().filter(|&&g| g >= 1).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of lines that overwrote an earlier judgment while parsing.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.judgments.iter().flat_map(|(q, docs)| {
            docs.iter().map(move |(d, &g)| (q.as_str(), d.as_str(), g))
        })
    }

    /// Parse `query_id iteration doc_id grade` lines. Blank lines are skipped.
    pub fn read<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut qrels = QrelSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 4 {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected 4 fields, found {}", fields.len()),
                ));
            }
            let grade: u32 = fields[3].parse().map_err(|_| {
                Error::parse(
                    source_name,
                    lineno,
                    format!("grade {:?} is not a non-negative integer", fields[3]),
                )
            })?;
            if qrels.insert(fields[0], fields[2], grade) {
                log::warn!(
                    "{source_name}:{lineno}: duplicate judgment for ({}, {}) overwrites earlier grade",
                    fields[0],
                    fields[2]
                );
            }
        }
        Ok(qrels)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (q, d, g) in self.iter() {
            writeln!(out, "{q} 0 {d} {g}")?;
        }
        Ok(())
    }
}

pub fn parse_qrels(path: &Path) -> Result<QrelSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    QrelSet::read(BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<QrelSet> {
        QrelSet::read(text.as_bytes(), "test")
    }

    #[test]
    fn single_line() {
        let q = parse("301 0 D1 1").unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.grade("301", "D1"), Some(1));
    }

    #[test]
    fn two_grades() {
        let q = parse("301 0 D1 2\n301 0 D2 0").unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.grade("301", "D1"), Some(2));
        assert_eq!(q.grade("301", "D2"), Some(0));
        assert_eq!(q.num_relevant("301"), 1);
    }

    #[test]
    fn duplicates_overwrite_and_count() {
        let q = parse("1 0 a 0\n1 0 a 2\n1 0 b 1\n").unwrap();
        assert_eq!(q.grade("1", "a"), Some(2));
        assert_eq!(q.duplicates(), 1);
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn bad_grade_names_line() {
        match parse("1 0 a 1\n\n1 0 b x\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("1 0 a -1").is_err());
        assert!(parse("1 0 a").is_err());
    }

    #[test]
    fn many_lines() {
        let text: String = (0..17_412)
            .map(|i| format!("{} 0 D{i} {}\n", 301 + i % 250, i % 3))
            .collect();
        assert_eq!(parse(&text).unwrap().len(), 17_412);
    }

    proptest! {
        #[test]
        fn round_trip(entries in proptest::collection::vec(("[0-9]{1,3}", "[A-Z]{1,3}-[0-9]{1,4}", 0u32..4), 0..60)) {
            let mut q = QrelSet::new();
            for (qid, did, g) in &entries {
                q.insert(qid, did, *g);
            }
            let mut buf = Vec::new();
            q.write(&mut buf).unwrap();
            let back = QrelSet::read(&buf[..], "rt").unwrap();
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), q.iter().collect::<Vec<_>>());
        }
    }
}
