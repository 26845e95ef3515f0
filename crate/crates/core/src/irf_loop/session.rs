use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FreezingRunList, ModelSummary};

/// One line of the JSON-lines session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub query_id: String,
    pub iter: usize,
    pub shown: Vec<String>,
    pub judgments: Vec<(String, bool)>,
    pub shortfall: usize,
    pub model: ModelSummary,
}

impl FreezingRunList {
    pub fn session_records(&self) -> Vec<SessionRecord> {
        self.records
            .iter()
            .map(|r| SessionRecord {
                query_id: self.query_id.clone(),
                iter: r.iter,
                shown: r.shown.clone(),
                judgments: r.judgments.clone(),
                shortfall: r.shortfall,
                model: r.model.clone(),
            })
            .collect()
    }
}

pub fn write_session_log<'a, W: Write>(
    out: &mut W,
    runs: impl IntoIterator<Item = &'a FreezingRunList>,
) -> Result<()> {
    for run in runs {
        for rec in run.session_records() {
            serde_json::to_writer(&mut *out, &rec)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn read_session_log<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<SessionRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn read_session_log_file(path: &Path) -> Result<Vec<SessionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_session_log(std::io::BufReader::new(file), &path.display().to_string())
}
