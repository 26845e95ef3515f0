//! On-disk snapshot of a [`CollectionIndex`].
//!
//! Layout of a snapshot directory:
//!
//! | file            | contents                                                        |
//! |-----------------|-----------------------------------------------------------------|
//! | `manifest.json` | format version, collection statistics, analyzer settings        |
//! | `lexicon.tsv`   | `term<TAB>df<TAB>cf`, one line per term in term-number order     |
//! | `docs.tsv`      | `doc_id<TAB>length`, one line per document in document order     |
//! | `postings.bin`  | per term: `u32` length, then `(u32 doc, u32 count)` pairs        |
//! | `forward.bin`   | per document: `u32` length, then `(u32 term, u32 count)` pairs   |
//! | `snippets.txt`  | optional, one display snippet per document                      |
//! | `stoplist.txt`  | optional, the stoplist used at indexing time                    |
//!
//! Integers are little-endian. Saving the same index twice produces identical bytes.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CollectionIndex, CollectionStats, DocNo, Posting, TermNo};
use crate::corpus_io::{Analyzer, StemmerKind, Stoplist};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    stats: CollectionStats,
    stemmer: Option<String>,
    has_stoplist: bool,
    has_snippets: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn check_field(kind: &str, value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::Snapshot(format!(
            "{kind} {value:?} contains a tab or newline"
        )));
    }
    Ok(())
}

pub fn save_index(index: &CollectionIndex, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        stats: index.stats.clone(),
        stemmer: index.analyzer.as_ref().map(|a| a.stemmer.name().to_string()),
        has_stoplist: index.analyzer.is_some(),
        has_snippets: !index.snippets.is_empty(),
    };
    let path = dir.join("manifest.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;

    let path = dir.join("lexicon.tsv");
    let mut w = create(&path)?;
    for (i, term) in index.lexicon.iter().enumerate() {
        check_field("term", term)?;
        writeln!(w, "{term}\t{}\t{}", index.df[i], index.cf[i]).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("docs.tsv");
    let mut w = create(&path)?;
    for (id, len) in index.doc_ids.iter().zip(&index.doc_lengths) {
        writeln!(w, "{id}\t{len}").map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("postings.bin");
    let mut w = create(&path)?;
    let res: std::io::Result<()> = (|| {
        for list in &index.postings {
            write_u32(&mut w, list.len() as u32)?;
            for p in list {
                write_u32(&mut w, p.doc)?;
                write_u32(&mut w, p.count)?;
            }
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(&path, e))?;

    let path = dir.join("forward.bin");
    let mut w = create(&path)?;
    let res: std::io::Result<()> = (|| {
        for list in &index.forward {
            write_u32(&mut w, list.len() as u32)?;
            for &(t, c) in list {
                write_u32(&mut w, t)?;
                write_u32(&mut w, c)?;
            }
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(&path, e))?;

    if !index.snippets.is_empty() {
        let path = dir.join("snippets.txt");
        let mut w = create(&path)?;
        for s in &index.snippets {
            let line: String = s.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).collect();
            writeln!(w, "{line}").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }

    if let Some(analyzer) = &index.analyzer {
        let path = dir.join("stoplist.txt");
        let mut w = create(&path)?;
        for word in analyzer.stoplist.sorted_words() {
            writeln!(w, "{word}").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

fn read_pairs(path: &Path, lists: usize) -> Result<Vec<Vec<(u32, u32)>>> {
    let mut r = open(path)?;
    let mut out = Vec::with_capacity(lists);
    let res: std::io::Result<()> = (|| {
        for _ in 0..lists {
            let n = read_u32(&mut r)? as usize;
            let mut list = Vec::with_capacity(n);
            for _ in 0..n {
                let a = read_u32(&mut r)?;
                let b = read_u32(&mut r)?;
                list.push((a, b));
            }
            out.push(list);
        }
        Ok(())
    })();
    res.map_err(|e| Error::io(path, e))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
    if !rest.is_empty() {
        return Err(Error::Snapshot(format!("{} has trailing bytes", path.display())));
    }
    Ok(out)
}

pub fn load_index(dir: &Path) -> Result<CollectionIndex> {
    let manifest_path = dir.join("manifest.json");
    let manifest: Manifest = serde_json::from_reader(open(&manifest_path)?)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: manifest.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let stats = manifest.stats;

    let mut lexicon = Vec::with_capacity(stats.vocab_size);
    let mut df = Vec::with_capacity(stats.vocab_size);
    let mut cf = Vec::with_capacity(stats.vocab_size);
    let path = dir.join("lexicon.tsv");
    for (i, line) in read_lines(&path)?.into_iter().enumerate() {
        let bad = || Error::parse(path.display().to_string(), i + 1, "expected term<TAB>df<TAB>cf");
        let mut parts = line.split('\t');
        let (Some(term), Some(d), Some(c), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        lexicon.push(term.to_string());
        df.push(d.parse().map_err(|_| bad())?);
        cf.push(c.parse().map_err(|_| bad())?);
    }

    let mut doc_ids = Vec::with_capacity(stats.num_docs);
    let mut doc_lengths = Vec::with_capacity(stats.num_docs);
    let path = dir.join("docs.tsv");
    for (i, line) in read_lines(&path)?.into_iter().enumerate() {
        let bad = || Error::parse(path.display().to_string(), i + 1, "expected doc_id<TAB>length");
        let (id, len) = line.split_once('\t').ok_or_else(bad)?;
        doc_ids.push(id.to_string());
        doc_lengths.push(len.parse().map_err(|_| bad())?);
    }

    if lexicon.len() != stats.vocab_size || doc_ids.len() != stats.num_docs {
        return Err(Error::Snapshot(format!(
            "manifest declares {} terms and {} documents, files hold {} and {}",
            stats.vocab_size,
            stats.num_docs,
            lexicon.len(),
            doc_ids.len()
        )));
    }

    let postings: Vec<Vec<Posting>> = read_pairs(&dir.join("postings.bin"), lexicon.len())?
        .into_iter()
        .map(|l| l.into_iter().map(|(doc, count)| Posting { doc, count }).collect())
        .collect();
    let forward: Vec<Vec<(TermNo, u32)>> = read_pairs(&dir.join("forward.bin"), doc_ids.len())?;

    let snippets = if manifest.has_snippets {
        read_lines(&dir.join("snippets.txt"))?
    } else {
        Vec::new()
    };
    let analyzer = match (&manifest.stemmer, manifest.has_stoplist) {
        (Some(name), true) => {
            let stemmer: StemmerKind = name.parse()?;
            let path = dir.join("stoplist.txt");
            Some(Analyzer::new(Stoplist::from_file(&path)?, stemmer))
        }
        _ => None,
    };

    let term_ids: HashMap<String, TermNo> = lexicon
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as TermNo))
        .collect();
    let doc_lookup: HashMap<String, DocNo> = doc_ids
        .iter()
        .enumerate()
        .map(|(i, d)| (d.clone(), i as DocNo))
        .collect();
    if term_ids.len() != lexicon.len() || doc_lookup.len() != doc_ids.len() {
        return Err(Error::Snapshot("duplicate term or document id".into()));
    }

    Ok(CollectionIndex {
        lexicon,
        term_ids,
        df,
        cf,
        postings,
        forward,
        doc_lengths,
        doc_ids,
        doc_lookup,
        snippets,
        analyzer,
        stats,
    })
}
