use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::{Analyzer, Topic};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopicFormat {
    /// SGML `<top>` blocks as distributed by TREC.
    TrecTitle,
    /// `query_id<TAB>query text` per line.
    Tsv,
}

impl FromStr for TopicFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trec_title" | "trec" => Ok(TopicFormat::TrecTitle),
            "tsv" => Ok(TopicFormat::Tsv),
            other => Err(Error::InvalidParameter(format!("unknown topic format {other:?}"))),
        }
    }
}

impl fmt::Display for TopicFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicFormat::TrecTitle => "trec_title",
            TopicFormat::Tsv => "tsv",
        })
    }
}

/// Which fields of a TREC topic make up the query text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopicField {
    #[default]
    Title,
    Description,
    TitleDescription,
}

impl fmt::Display for TopicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicField::Title => "title",
            TopicField::Description => "desc",
            TopicField::TitleDescription => "title+desc",
        })
    }
}

impl FromStr for TopicField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "title" => Ok(TopicField::Title),
            "desc" => Ok(TopicField::Description),
            "title+desc" => Ok(TopicField::TitleDescription),
            other => Err(Error::InvalidParameter(format!("unknown topic field {other:?}"))),
        }
    }
}

pub fn parse_topics(
    path: &Path,
    format: TopicFormat,
    field: TopicField,
    analyzer: &Analyzer,
) -> Result<Vec<Topic>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_topics_str(&text, &path.display().to_string(), format, field, analyzer)
}

pub fn parse_topics_str(
    text: &str,
    source_name: &str,
    format: TopicFormat,
    field: TopicField,
    analyzer: &Analyzer,
) -> Result<Vec<Topic>> {
    let raw = match format {
        TopicFormat::Tsv => raw_tsv(text, source_name)?,
        TopicFormat::TrecTitle => raw_trec(text, source_name, field)?,
    };
    let mut seen = HashSet::new();
    let mut topics = Vec::with_capacity(raw.len());
    for (query_id, query_text) in raw {
        if !seen.insert(query_id.clone()) {
            return Err(Error::DuplicateQuery(query_id));
        }
        let terms = analyzer.normalize(&query_text);
        if terms.is_empty() {
            return Err(Error::EmptyTopic(query_id));
        }
        topics.push(Topic { query_id, terms });
    }
    Ok(topics)
}

fn raw_tsv(text: &str, source_name: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((qid, query)) = line.split_once('\t') else {
            return Err(Error::parse(source_name, i + 1, "expected query_id<TAB>text"));
        };
        let qid = qid.trim();
        if qid.is_empty() {
            return Err(Error::parse(source_name, i + 1, "empty query id"));
        }
        out.push((qid.to_string(), query.to_string()));
    }
    Ok(out)
}

/// Text following `<tag>` up to the next tag, with an optional label prefix removed.
fn trec_field<'a>(block: &'a str, tag: &str, label: &str) -> Option<&'a str> {
    let open = format!("<{tag}>");
    let start = block.find(&open)? + open.len();
    let rest = &block[start..];
    let end = rest.find('<').unwrap_or(rest.len());
    let value = rest[..end].trim();
    Some(value.strip_prefix(label).unwrap_or(value).trim())
}

fn raw_trec(text: &str, source_name: &str, field: TopicField) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, block) in text.split("<top>").skip(1).enumerate() {
        let block = block.split("</top>").next().unwrap_or(block);
        let qid = trec_field(block, "num", "Number:")
            .filter(|q| !q.is_empty())
            .ok_or_else(|| Error::parse(source_name, n + 1, "topic block without <num>"))?;
        let title = trec_field(block, "title", "Topic:").unwrap_or("");
        let desc = trec_field(block, "desc", "Description:").unwrap_or("");
        let query = match field {
            TopicField::Title => title.to_string(),
            TopicField::Description => desc.to_string(),
            TopicField::TitleDescription => format!("{title} {desc}"),
        };
        out.push((qid.to_string(), query));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREC: &str = "<top>\n<num> Number: 301\n<title> International Organized Crime\n\n\
<desc> Description:\nIdentify organizations that participate in international criminal activity.\n\n\
<narr> Narrative:\nA relevant document must...\n</top>\n\n<top>\n<num> Number: 302\n<title> Poliomyelitis and Post-Polio\n\
<desc> Description:\nIs the disease under control?\n</top>\n";

    #[test]
    fn tsv_topic_matches_normalize() {
        let analyzer = Analyzer::standard();
        let topics = parse_topics_str(
            "q1\tinternational organized crime\n",
            "t",
            TopicFormat::Tsv,
            TopicField::Title,
            &analyzer,
        )
        .unwrap();
        assert_eq!(topics.len(), 1);
        assert_eq!(topics[0].query_id, "q1");
        assert_eq!(topics[0].terms, analyzer.normalize("international organized crime"));
        assert!(topics[0].terms[0].starts_with("intern"));
        assert!(topics[0].terms[1].starts_with("organ"));
        assert_eq!(topics[0].terms[2], "crime");
    }

    #[test]
    fn empty_file() {
        let topics =
            parse_topics_str("", "t", TopicFormat::Tsv, TopicField::Title, &Analyzer::standard()).unwrap();
        assert!(topics.is_empty());
    }

    #[test]
    fn duplicate_query_id() {
        let err = parse_topics_str(
            "1\tdogs\n1\tcats\n",
            "t",
            TopicFormat::Tsv,
            TopicField::Title,
            &Analyzer::standard(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateQuery(q) if q == "1"));
    }

    #[test]
    fn trec_fields() {
        let analyzer = Analyzer::standard();
        let titles =
            parse_topics_str(TREC, "t", TopicFormat::TrecTitle, TopicField::Title, &analyzer).unwrap();
        assert_eq!(titles.len(), 2);
        assert_eq!(titles[0].query_id, "301");
        assert_eq!(titles[0].terms, analyzer.normalize("International Organized Crime"));
        assert_eq!(titles[1].query_id, "302");

        let both = parse_topics_str(
            TREC,
            "t",
            TopicFormat::TrecTitle,
            TopicField::TitleDescription,
            &analyzer,
        )
        .unwrap();
        assert!(both[0].terms.len() > titles[0].terms.len());
    }

    #[test]
    fn many_topics_preserve_order() {
        let text: String = (301..551).map(|q| format!("{q}\ttopic number {q}\n")).collect();
        let topics =
            parse_topics_str(&text, "t", TopicFormat::Tsv, TopicField::Title, &Analyzer::standard())
                .unwrap();
        assert_eq!(topics.len(), 250);
        assert_eq!(topics[0].query_id, "301");
        assert_eq!(topics[249].query_id, "550");
    }
}
