//! TREC run files: `query_id Q0 doc_id rank score run_tag`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::ScoredDoc;
use crate::error::{Error, Result};

/// A ranked result list for one query. Scores are non-increasing and document ids unique.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredList {
    query_id: String,
    entries: Vec<ScoredDoc>,
}

impl ScoredList {
    pub fn new(query_id: impl Into<String>, entries: Vec<ScoredDoc>) -> Result<Self> {
        let query_id = query_id.into();
        if entries.windows(2).any(|w| w[1].score > w[0].score) {
            return Err(Error::InvalidParameter(format!(
                "scores for query {query_id:?} are not non-increasing"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = entries.iter().find(|e| !seen.insert(e.doc_id.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "document {:?} appears twice for query {query_id:?}",
                dup.doc_id
            )));
        }
        Ok(ScoredList { query_id, entries })
    }

    /// Assign strictly decreasing scores `n, n-1, ..., 1` to an ordered list.
    pub fn from_order(query_id: impl Into<String>, doc_ids: &[String]) -> Result<Self> {
        let n = doc_ids.len();
        let entries = doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| ScoredDoc {
                doc_id: d.clone(),
                score: (n - i) as f64,
            })
            .collect();
        Self::new(query_id, entries)
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn entries(&self) -> &[ScoredDoc] {
        &self.entries
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.doc_id.clone()).collect()
    }

    pub fn write_trec<W: Write>(&self, out: &mut W, run_tag: &str) -> std::io::Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(
                out,
                "{} Q0 {} {} {:.6} {}",
                self.query_id,
                e.doc_id,
                i + 1,
                e.score,
                run_tag
            )?;
        }
        Ok(())
    }
}

/// Ranked document ids per query, as read back from a run file.
pub type RunSet = BTreeMap<String, Vec<String>>;

/// Read a run file. Within each query, lines are ordered by descending score with ties
/// broken by ascending rank column, then by doc id.
pub fn read_run<R: BufRead>(reader: R, source_name: &str) -> Result<RunSet> {
    let mut rows: BTreeMap<String, Vec<(f64, u64, String)>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 6 {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let rank: u64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(source_name, i + 1, "rank is not an integer"))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(source_name, i + 1, "score is not a number"))?;
        rows.entry(fields[0].to_string())
            .or_default()
            .push((score, rank, fields[2].to_string()));
    }
    let mut run = RunSet::new();
    for (qid, mut docs) in rows {
        docs.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.cmp(&b.1))
                .then_with(|| a.2.cmp(&b.2))
        });
        let mut seen = std::collections::HashSet::new();
        let ids: Vec<String> = docs
            .into_iter()
            .map(|(_, _, d)| d)
            .filter(|d| seen.insert(d.clone()))
            .collect();
        run.insert(qid, ids);
    }
    Ok(run)
}

pub fn read_run_file(path: &Path) -> Result<RunSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_run(BufReader::new(file), &path.display().to_string())
}
