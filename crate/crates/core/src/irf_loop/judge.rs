use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus_io::QrelSet;
use crate::error::Result;
use crate::index::{CollectionIndex, SNIPPET_CHARS};

use super::session::SessionRecord;

/// Supplies relevance judgments during a session.
///
/// `Ok(None)` aborts the session; the loop then stops asking and assembles what it has.
pub trait Judge {
    fn judge(&mut self, index: &CollectionIndex, query_id: &str, doc_id: &str) -> Result<Option<bool>>;
}

/// Binary relevance from graded qrels: grade 1 or higher is relevant, unjudged is not.
pub fn simulate_judgment(qrels: &QrelSet, query_id: &str, doc_id: &str) -> bool {
    qrels.is_relevant(query_id, doc_id)
}

/// Judges with the true labels.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedJudge<'a> {
    qrels: &'a QrelSet,
}

impl<'a> SimulatedJudge<'a> {
    pub fn new(qrels: &'a QrelSet) -> Self {
        SimulatedJudge { qrels }
    }
}

impl Judge for SimulatedJudge<'_> {
    fn judge(&mut self, _index: &CollectionIndex, query_id: &str, doc_id: &str) -> Result<Option<bool>> {
        Ok(Some(simulate_judgment(self.qrels, query_id, doc_id)))
    }
}

/// One prompt/answer exchange of an interactive session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub query_id: String,
    pub doc_id: String,
    pub answer: Option<bool>,
}

/// Asks a person. Shows a snippet of each document and reads `y` or `n`.
/// End of input aborts the session.
pub struct InteractiveJudge<R, W> {
    input: R,
    output: W,
    transcript: Vec<TranscriptEntry>,
}

impl<R: BufRead, W: Write> InteractiveJudge<R, W> {
    pub fn new(input: R, output: W) -> Self {
        InteractiveJudge {
            input,
            output,
            transcript: Vec::new(),
        }
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    fn snippet(index: &CollectionIndex, doc_id: &str) -> String {
        let Some(docno) = index.docno(doc_id) else {
            return String::new();
        };
        let text = match index.snippet(docno) {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => index
                .doc_terms(docno)
                .iter()
                .map(|&(t, _)| index.term(t))
                .collect::<Vec<_>>()
                .join(" "),
        };
        match text.char_indices().nth(SNIPPET_CHARS) {
            Some((cut, _)) => format!("{}...", &text[..cut]),
            None => text,
        }
    }

    fn ask(&mut self, index: &CollectionIndex, query_id: &str, doc_id: &str) -> Result<Option<bool>> {
        writeln!(self.output, "\n[{query_id}] {doc_id}")?;
        writeln!(self.output, "{}", Self::snippet(index, doc_id))?;
        loop {
            write!(self.output, "relevant? [y/n] ")?;
            self.output.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                writeln!(self.output)?;
                return Ok(None);
            }
            match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => return Ok(Some(true)),
                "n" | "no" => return Ok(Some(false)),
                _ => writeln!(self.output, "please answer y or n")?,
            }
        }
    }
}

impl<R: BufRead, W: Write> Judge for InteractiveJudge<R, W> {
    fn judge(&mut self, index: &CollectionIndex, query_id: &str, doc_id: &str) -> Result<Option<bool>> {
        let answer = self.ask(index, query_id, doc_id)?;
        self.transcript.push(TranscriptEntry {
            query_id: query_id.to_string(),
            doc_id: doc_id.to_string(),
            answer,
        });
        Ok(answer)
    }
}

/// Replays judgments from a session log. A document without a recorded judgment aborts,
/// which is what happened in the recorded session.
#[derive(Debug, Clone, Default)]
pub struct ReplayJudge {
    judgments: HashMap<(String, String), bool>,
}

impl ReplayJudge {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a SessionRecord>) -> Self {
        let mut judgments = HashMap::new();
        for rec in records {
            for (d, r) in &rec.judgments {
                judgments.insert((rec.query_id.clone(), d.clone()), *r);
            }
        }
        ReplayJudge { judgments }
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }
}

impl Judge for ReplayJudge {
    fn judge(&mut self, _index: &CollectionIndex, query_id: &str, doc_id: &str) -> Result<Option<bool>> {
        Ok(self
            .judgments
            .get(&(query_id.to_string(), doc_id.to_string()))
            .copied())
    }
}

impl<J: Judge + ?Sized> Judge for &mut J {
    fn judge(&mut self, index: &CollectionIndex, query_id: &str, doc_id: &str) -> Result<Option<bool>> {
        (**self).judge(index, query_id, doc_id)
    }
}
