use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use super::RawDocument;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionFormat {
    TrecText,
    TrecWeb,
}

impl FromStr for CollectionFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trectext" => Ok(CollectionFormat::TrecText),
            "trecweb" => Ok(CollectionFormat::TrecWeb),
            other => Err(Error::InvalidParameter(format!("unknown collection format {other:?}"))),
        }
    }
}

impl fmt::Display for CollectionFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CollectionFormat::TrecText => "trectext",
            CollectionFormat::TrecWeb => "trecweb",
        })
    }
}

const DOC_OPEN: &[u8] = b"<DOC>";
const DOC_CLOSE: &[u8] = b"</DOC>";

fn find(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

/// Streaming reader over `<DOC>` blocks of a TREC text or web collection.
///
/// Documents are yielded in file order. Bytes outside `<DOC>` blocks are ignored; invalid
/// UTF-8 inside a block is replaced rather than rejected, since older TREC collections are
/// Latin-1.
pub struct TrecReader<R> {
    reader: R,
    format: CollectionFormat,
    buf: Vec<u8>,
    /// Byte offset of `buf[0]` in the input.
    buf_offset: u64,
    /// Where to resume looking for `</DOC>` in `buf` once a `<DOC>` has been seen.
    scan_from: usize,
    blocks: usize,
    done: bool,
}

impl<R: BufRead> TrecReader<R> {
    pub fn new(reader: R, format: CollectionFormat) -> Self {
        TrecReader {
            reader,
            format,
            buf: Vec::new(),
            buf_offset: 0,
            scan_from: 0,
            blocks: 0,
            done: false,
        }
    }

    fn fill(&mut self) -> Result<bool> {
        let n = self.reader.read_until(b'\n', &mut self.buf)?;
        Ok(n > 0)
    }

    fn consume(&mut self, n: usize) {
        self.buf.drain(..n);
        self.buf_offset += n as u64;
        self.scan_from = 0;
    }

    fn next_block(&mut self) -> Result<Option<RawDocument>> {
        loop {
            let Some(start) = find(&self.buf, DOC_OPEN) else {
                if let Some(pos) = find(&self.buf, DOC_CLOSE) {
                    return Err(Error::MalformedDocument {
                        offset: self.buf_offset + pos as u64,
                        reason: "</DOC> without a matching <DOC>".into(),
                    });
                }
                // Keep a short tail in case a tag straddles a read boundary.
                let keep = self.buf.len().min(DOC_CLOSE.len());
                let drop = self.buf.len() - keep;
                self.consume(drop);
                if !self.fill()? {
                    return Ok(None);
                }
                continue;
            };
            let body_start = start + DOC_OPEN.len();
            let from = body_start.max(self.scan_from);
            match find(&self.buf[from..], DOC_CLOSE) {
                Some(rel) => {
                    let end = from + rel;
                    let body = &self.buf[body_start..end];
                    let offset = self.buf_offset + start as u64;
                    if let Some(nested) = find(body, DOC_OPEN) {
                        return Err(Error::MalformedDocument {
                            offset: offset + (DOC_OPEN.len() + nested) as u64,
                            reason: "nested <DOC> before </DOC>".into(),
                        });
                    }
                    self.blocks += 1;
                    let doc = parse_block(body, self.format, self.blocks, offset)?;
                    self.consume(end + DOC_CLOSE.len());
                    return Ok(Some(doc));
                }
                None => {
                    // Tags never straddle lines in well-formed input, but stay conservative.
                    self.scan_from = self.buf.len().saturating_sub(DOC_CLOSE.len()).max(body_start);
                    if !self.fill()? {
                        return Err(Error::MalformedDocument {
                            offset: self.buf_offset + start as u64,
                            reason: "<DOC> is never closed".into(),
                        });
                    }
                }
            }
        }
    }
}

impl<R: BufRead> Iterator for TrecReader<R> {
    type Item = Result<RawDocument>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_block() {
            Ok(Some(doc)) => Some(Ok(doc)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Open a collection file for streaming.
pub fn parse_trec_collection(
    path: &Path,
    format: CollectionFormat,
) -> Result<TrecReader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(TrecReader::new(BufReader::new(file), format))
}

fn element<'a>(body: &'a str, tag: &str) -> Option<(usize, usize, &'a str)> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = body.find(&open)?;
    let inner_start = start + open.len();
    let inner_len = body[inner_start..].find(&close)?;
    let end = inner_start + inner_len + close.len();
    Some((start, end, &body[inner_start..inner_start + inner_len]))
}

fn parse_block(body: &[u8], format: CollectionFormat, block: usize, offset: u64) -> Result<RawDocument> {
    let body = String::from_utf8_lossy(body);
    let Some((start, end, docno)) = element(&body, "DOCNO") else {
        return Err(Error::MissingDocno { block, offset });
    };
    let doc_id = docno.trim().to_string();
    if doc_id.is_empty() {
        return Err(Error::MissingDocno { block, offset });
    }
    let mut rest = format!("{} {}", &body[..start], &body[end..]);
    if format == CollectionFormat::TrecWeb {
        if let Some((s, e, _)) = element(&rest, "DOCHDR") {
            rest.replace_range(s..e, " ");
        }
    }
    Ok(RawDocument {
        doc_id,
        text: strip_tags(&rest),
    })
}

/// Remove markup and collapse whitespace.
fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_tag = false;
    for c in text.chars() {
        match c {
            '<' => {
                in_tag = true;
                out.push(' ');
            }
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}
