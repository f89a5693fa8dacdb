use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use super::pinyin::{family_nucleus, pinyin_final, pinyin_of, rhyme_family};
use super::syllables::{is_vowel, tokens, word_syllables, Token};
use super::Lang;

/// Normalized rhyme family of a line's final syllable, or unknown.
///
/// Structural equality compares tags; use [`RhymeClass::rhymes_with`] for
/// matching, where unknown never matches anything.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RhymeClass(Option<String>);

impl RhymeClass {
    pub const UNKNOWN: RhymeClass = RhymeClass(None);

    pub fn known(tag: impl Into<String>) -> Self {
        RhymeClass(Some(tag.into()))
    }

    pub fn tag(&self) -> Option<&str> {
        self.0.as_deref()
    }

    pub fn is_known(&self) -> bool {
        self.0.is_some()
    }

    pub fn rhymes_with(&self, other: &RhymeClass) -> bool {
        matches!((&self.0, &other.0), (Some(a), Some(b)) if a == b)
    }

    fn nucleus(&self) -> Option<char> {
        let tag = self.tag()?;
        family_nucleus(tag).or_else(|| tag.chars().find(|&c| is_vowel(c)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMode {
    #[default]
    Binary,
    Graded,
}

/// EN rule: last vowel group to the end of the word, lowercased.
fn english_rhyme(word: &str) -> RhymeClass {
    let lower = word.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let Some(last_vowel) = bytes.iter().rposition(|&b| is_vowel(b as char)) else {
        return RhymeClass::UNKNOWN;
    };
    let mut start = last_vowel;
    while start > 0 && is_vowel(bytes[start - 1] as char) {
        start -= 1;
    }
    RhymeClass::known(&lower[start..])
}

fn han_rhyme(c: char) -> RhymeClass {
    pinyin_of(c)
        .and_then(pinyin_final)
        .and_then(|f| rhyme_family(&f))
        .map_or(RhymeClass::UNKNOWN, RhymeClass::known)
}

/// Rhyme class of the line's final syllabifiable token.
///
/// ZH looks the final Han character up in the embedded pinyin table; a
/// trailing Latin word falls back to the EN rule. Characters missing from
/// the table give [`RhymeClass::UNKNOWN`].
pub fn rhyme_class_of(line: &str, lang: Lang) -> RhymeClass {
    let last = tokens(line, lang)
        .filter(|t| match t {
            Token::Han(_) => true,
            Token::Word(w) => word_syllables(w) > 0,
        })
        .last();
    match last {
        Some(Token::Han(c)) => han_rhyme(c),
        Some(Token::Word(w)) => english_rhyme(w),
        None => RhymeClass::UNKNOWN,
    }
}

/// Similarity of two rhyme classes in `[0, 1]`.
///
/// Binary: 1 for equal known classes. Graded: additionally 0.5 when the
/// families share a nucleus vowel. Unknown always yields 0.
pub fn rhyme_similarity(a: &RhymeClass, b: &RhymeClass, mode: SimilarityMode) -> f64 {
    if a.rhymes_with(b) {
        return 1.0;
    }
    match mode {
        SimilarityMode::Binary => 0.0,
        SimilarityMode::Graded => match (a.nucleus(), b.nucleus()) {
            (Some(x), Some(y)) if x == y => 0.5,
            _ => 0.0,
        },
    }
}

impl core::fmt::Display for RhymeClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match &self.0 {
            Some(t) => f.write_str(t),
            None => f.write_str("UNKNOWN"),
        }
    }
}

impl From<&str> for RhymeClass {
    fn from(tag: &str) -> Self {
        RhymeClass::known(tag.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zh_final_family() {
        assert_eq!(rhyme_class_of("月光", Lang::Zh), RhymeClass::known("ang"));
        assert_eq!(rhyme_class_of("☃", Lang::Zh), RhymeClass::UNKNOWN);
        assert_eq!(rhyme_class_of("思念的月光。", Lang::Zh), RhymeClass::known("ang"));
        assert_eq!(rhyme_class_of("故乡", Lang::Zh), rhyme_class_of("天堂", Lang::Zh));
    }

    #[test]
    fn en_last_vowel_group() {
        assert_eq!(rhyme_class_of("night", Lang::En), RhymeClass::known("ight"));
        assert_eq!(rhyme_class_of("All through the Night!", Lang::En), RhymeClass::known("ight"));
        assert_eq!(rhyme_class_of("every day", Lang::En), RhymeClass::known("ay"));
        assert_eq!(rhyme_class_of("hmm", Lang::En), RhymeClass::UNKNOWN);
        assert_eq!(rhyme_class_of("", Lang::En), RhymeClass::UNKNOWN);
    }

    #[test]
    fn similarity_examples() {
        let ang = RhymeClass::known("ang");
        let ong = RhymeClass::known("ong");
        assert_eq!(rhyme_similarity(&ang, &ang, SimilarityMode::Binary), 1.0);
        assert_eq!(rhyme_similarity(&ang, &ong, SimilarityMode::Binary), 0.0);
        assert_eq!(
            rhyme_similarity(&RhymeClass::UNKNOWN, &RhymeClass::UNKNOWN, SimilarityMode::Graded),
            0.0
        );
    }

    #[test]
    fn graded_shares_nucleus() {
        let an = RhymeClass::known("an");
        let ang = RhymeClass::known("ang");
        let u = RhymeClass::known("u");
        assert_eq!(rhyme_similarity(&an, &ang, SimilarityMode::Graded), 0.5);
        assert_eq!(rhyme_similarity(&an, &u, SimilarityMode::Graded), 0.0);
        assert_eq!(rhyme_similarity(&an, &ang, SimilarityMode::Binary), 0.0);
    }

    #[test]
    fn unknown_never_rhymes() {
        assert!(!RhymeClass::UNKNOWN.rhymes_with(&RhymeClass::UNKNOWN));
    }
}
