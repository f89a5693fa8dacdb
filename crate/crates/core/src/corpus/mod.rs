//! Paragraph and line annotation: segmentation, syllables, rhyme classes.

pub(crate) mod pinyin;
mod rhyme;
mod syllables;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use pinyin::{pinyin_final, pinyin_of, rhyme_family, table_len, table_version, FAMILIES};
pub use rhyme::{rhyme_class_of, rhyme_similarity, RhymeClass, SimilarityMode};
pub use syllables::{count_syllables, is_han, word_syllables};

/// Boundary token used when none is configured.
pub const DEFAULT_BOUNDARY: &str = " / ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    En,
    Zh,
}

impl FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            t if t.eq_ignore_ascii_case("en") => Ok(Lang::En),
            t if t.eq_ignore_ascii_case("zh") => Ok(Lang::Zh),
            other => Err(Error::UnsupportedLanguage(other.to_string())),
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::En => "en",
            Lang::Zh => "zh",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub text: String,
    pub syllable_count: u32,
    pub rhyme_class: RhymeClass,
}

impl Line {
    pub fn annotate(text: &str, lang: Lang) -> Self {
        Line {
            text: text.to_string(),
            syllable_count: count_syllables(text, lang),
            rhyme_class: rhyme_class_of(text, lang),
        }
    }

    /// Non-whitespace character count.
    pub fn char_len(&self) -> usize {
        self.text.chars().filter(|c| !c.is_whitespace()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub lang: Lang,
    pub lines: Vec<Line>,
}

impl Paragraph {
    /// Annotates `lines` in order. Fails when there are no lines.
    pub fn new<I, S>(id: impl Into<String>, lang: Lang, lines: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let id = id.into();
        let lines: Vec<Line> = lines
            .into_iter()
            .map(|l| Line::annotate(l.as_ref(), lang))
            .collect();
        if lines.is_empty() {
            return Err(Error::EmptyParagraph(id));
        }
        Ok(Paragraph { id, lang, lines })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn syllable_counts(&self) -> Vec<u32> {
        self.lines.iter().map(|l| l.syllable_count).collect()
    }

    pub fn total_syllables(&self) -> u32 {
        self.lines.iter().map(|l| l.syllable_count).sum()
    }

    /// Lines joined with `boundary`.
    pub fn joined(&self, boundary: &str) -> String {
        let mut out = String::new();
        for (i, line) in self.lines.iter().enumerate() {
            if i > 0 {
                out.push_str(boundary);
            }
            out.push_str(&line.text);
        }
        out
    }
}

/// Splits candidate text on `boundary_token` and trims each segment.
///
/// The token is matched with its surrounding whitespace stripped, so the
/// default `" / "` also splits `"a/b"`. Never returns an empty list.
pub fn segment_candidate(text: &str, boundary_token: &str) -> Vec<String> {
    let token = match boundary_token.trim() {
        "" => boundary_token,
        t => t,
    };
    if token.is_empty() {
        return alloc::vec![text.trim().to_string()];
    }
    text.split(token).map(|s| s.trim().to_string()).collect()
}

/// Segments and annotates candidate text as lines in `lang`.
pub fn candidate_lines(text: &str, boundary_token: &str, lang: Lang) -> Vec<Line> {
    segment_candidate(text, boundary_token)
        .iter()
        .map(|s| Line::annotate(s, lang))
        .collect()
}
