//! Plaintext and JSONL corpus readers.
//!
//! Plaintext: paragraphs are separated by blank lines; within a paragraph,
//! lines are separated by the boundary token or by newlines. Ids are
//! assigned as `p0001`, `p0002`, ... in input order.
//!
//! JSONL: one object per line, `{"id": .., "lang": "en", "lines": [..]}`
//! with an optional `"reference"` translation used for BLEU.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use lyricar_core::corpus::{segment_candidate, Lang, Paragraph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Plaintext,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plaintext" | "text" | "txt" => Ok(CorpusFormat::Plaintext),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unsupported corpus format {other:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    #[serde(default)]
    lang: Option<String>,
    lines: Vec<String>,
    #[serde(default)]
    reference: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedCorpus {
    pub paragraphs: Vec<Paragraph>,
    /// Reference translations keyed by paragraph id.
    pub references: BTreeMap<String, String>,
    /// Paragraphs skipped because they had no non-empty line.
    pub dropped: usize,
}

/// Parses a corpus from bytes. `default_lang` applies to plaintext and to
/// JSONL records without a `lang` field.
pub fn parse_corpus(bytes: &[u8], format: CorpusFormat, default_lang: Lang, boundary: &str) -> Result<ParsedCorpus> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::Malformed { line, message: "invalid UTF-8".into() }
    })?;
    let parsed = match format {
        CorpusFormat::Plaintext => parse_plaintext(text, default_lang, boundary)?,
        CorpusFormat::Jsonl => parse_jsonl(text, default_lang)?,
    };
    if parsed.dropped > 0 {
        log::warn!("dropped {} empty paragraph(s)", parsed.dropped);
    }
    Ok(parsed)
}

pub fn read_corpus(path: &Path, format: CorpusFormat, default_lang: Lang, boundary: &str) -> Result<ParsedCorpus> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&bytes, format, default_lang, boundary)
}

fn non_empty_lines<'a>(raw: impl IntoIterator<Item = &'a str>, boundary: &str) -> Vec<String> {
    raw.into_iter()
        .flat_map(|l| segment_candidate(l, boundary))
        .filter(|l| !l.is_empty())
        .collect()
}

fn parse_plaintext(text: &str, lang: Lang, boundary: &str) -> Result<ParsedCorpus> {
    let mut out = ParsedCorpus::default();
    let mut block: Vec<&str> = Vec::new();
    let flush = |block: &mut Vec<&str>, out: &mut ParsedCorpus| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let lines = non_empty_lines(block.drain(..), boundary);
        if lines.is_empty() {
            out.dropped += 1;
            return Ok(());
        }
        let id = format!("p{:04}", out.paragraphs.len() + 1);
        out.paragraphs.push(Paragraph::new(id, lang, lines)?);
        Ok(())
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut block, &mut out)?;
        } else {
            block.push(line);
        }
    }
    flush(&mut block, &mut out)?;
    Ok(out)
}

fn parse_jsonl(text: &str, default_lang: Lang) -> Result<ParsedCorpus> {
    let mut out = ParsedCorpus::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(raw).map_err(|e| Error::Malformed { line, message: e.to_string() })?;
        let lang = match rec.lang.as_deref() {
            None => default_lang,
            Some(tag) => Lang::from_str(tag).map_err(|e| Error::Malformed { line, message: e.to_string() })?,
        };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId { id: rec.id, line });
        }
        let lines: Vec<String> = rec.lines.iter().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
        if lines.is_empty() {
            out.dropped += 1;
            continue;
        }
        if let Some(r) = rec.reference {
            out.references.insert(rec.id.clone(), r);
        }
        out.paragraphs.push(Paragraph::new(rec.id, lang, lines)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    lang: Lang,
    lines: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<&'a str>,
}

/// Writes the corpus in the JSONL input format; reading it back yields the
/// same paragraphs and references.
pub fn write_corpus_jsonl(corpus: &ParsedCorpus, mut w: impl std::io::Write) -> std::io::Result<()> {
    for p in &corpus.paragraphs {
        let rec = RecordOut {
            id: &p.id,
            lang: p.lang,
            lines: p.lines.iter().map(|l| l.text.as_str()).collect(),
            reference: corpus.references.get(&p.id).map(String::as_str),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// One fully annotated paragraph (syllables, rhyme classes) per line.
pub fn write_annotated(paragraphs: &[Paragraph], mut w: impl std::io::Write) -> std::io::Result<()> {
    for p in paragraphs {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plaintext_blocks() {
        let c = parse_corpus(b"Hello world / Good night\n\n\nfirst\nsecond / third\n", CorpusFormat::Plaintext, Lang::En, " / ").unwrap();
        assert_eq!(c.paragraphs.len(), 2);
        assert_eq!(c.paragraphs[0].len(), 2);
        assert_eq!(c.paragraphs[1].len(), 3);
        assert_eq!(c.paragraphs[1].id, "p0002");
    }

    #[test]
    fn empty_stream() {
        for f in [CorpusFormat::Plaintext, CorpusFormat::Jsonl] {
            let c = parse_corpus(b"", f, Lang::En, " / ").unwrap();
            assert!(c.paragraphs.is_empty());
            assert_eq!(c.dropped, 0);
        }
    }

    #[test]
    fn jsonl_errors_name_the_line() {
        let input = b"{\"id\":\"a\",\"lines\":[\"x\"]}\n{\"id\": 3}\n";
        match parse_corpus(input, CorpusFormat::Jsonl, Lang::En, " / ") {
            Err(Error::Malformed { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        let input = b"{\"id\":\"a\",\"lang\":\"fr\",\"lines\":[\"x\"]}\n";
        assert!(matches!(parse_corpus(input, CorpusFormat::Jsonl, Lang::En, " / "), Err(Error::Malformed { line: 1, .. })));
        let input = b"{\"id\":\"a\",\"lines\":[\"x\"]}\n{\"id\":\"a\",\"lines\":[\"y\"]}\n";
        assert!(matches!(parse_corpus(input, CorpusFormat::Jsonl, Lang::En, " / "), Err(Error::DuplicateId { line: 2, .. })));
    }

    #[test]
    fn empty_paragraphs_dropped_and_counted() {
        let input = b"{\"id\":\"a\",\"lines\":[\"  \"]}\n{\"id\":\"b\",\"lines\":[\"x\"],\"reference\":\"y\"}\n";
        let c = parse_corpus(input, CorpusFormat::Jsonl, Lang::En, " / ").unwrap();
        assert_eq!(c.dropped, 1);
        assert_eq!(c.paragraphs.len(), 1);
        assert_eq!(c.references["b"], "y");
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let err = parse_corpus(b"ok\n\xff\n", CorpusFormat::Plaintext, Lang::En, " / ").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
    }
}
