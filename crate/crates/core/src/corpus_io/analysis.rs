use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::krovetz;
use crate::error::{Error, Result};

const INQUERY: &str = include_str!("../inquery.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StemmerKind {
    #[default]
    Krovetz,
    None,
}

impl StemmerKind {
    pub fn stem(self, token: &str) -> String {
        match self {
            StemmerKind::Krovetz => krovetz::stem(token),
            StemmerKind::None => token.to_string(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StemmerKind::Krovetz => "krovetz",
            StemmerKind::None => "none",
        }
    }
}

impl fmt::Display for StemmerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StemmerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krovetz" => Ok(StemmerKind::Krovetz),
            "none" => Ok(StemmerKind::None),
            other => Err(Error::InvalidParameter(format!("unknown stemmer {other:?}"))),
        }
    }
}

/// A set of words removed before indexing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    /// The 418-word INQUERY stoplist.
    pub fn inquery() -> Self {
        Self::from_lines(INQUERY)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// One word per line; blank lines and surrounding whitespace are ignored.
    pub fn from_lines(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        Stoplist { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_lines(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in sorted order, for writing alongside an index.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.words.iter().map(String::as_str).collect();
        words.sort_unstable();
        words
    }
}

/// Split on runs of non-alphanumeric characters and lowercase each piece.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .flat_map(|t| {
            let lower = t.to_lowercase();
            // Lowercasing can introduce combining marks; split again so output is stable.
            lower
                .split(|c: char| !c.is_alphanumeric())
                .filter(|p| !p.is_empty())
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
}

/// Tokenize, drop stopwords, stem. Stopwords are checked again after stemming so that
/// no emitted term is ever in the stoplist.
pub fn normalize(text: &str, stoplist: &Stoplist, stemmer: StemmerKind) -> Vec<String> {
    tokenize(text)
        .filter(|t| !stoplist.contains(t))
        .map(|t| stemmer.stem(&t))
        .filter(|t| !stoplist.contains(t))
        .collect()
}

/// Stoplist plus stemmer, applied identically to documents and topics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Analyzer {
    pub stoplist: Stoplist,
    pub stemmer: StemmerKind,
}

impl Analyzer {
    pub fn new(stoplist: Stoplist, stemmer: StemmerKind) -> Self {
        Analyzer { stoplist, stemmer }
    }

    /// INQUERY stoplist with the Krovetz stemmer.
    pub fn standard() -> Self {
        Analyzer::new(Stoplist::inquery(), StemmerKind::Krovetz)
    }

    pub fn normalize(&self, text: &str) -> Vec<String> {
        normalize(text, &self.stoplist, self.stemmer)
    }
}
