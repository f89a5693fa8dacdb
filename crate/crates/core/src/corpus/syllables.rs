use super::Lang;

/// CJK unified ideographs, extensions A-F and compatibility ideographs.
pub fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x30000..=0x3134F)
}

pub(crate) fn is_vowel(c: char) -> bool {
    matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '\''
}

/// A token that can carry syllables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Token<'a> {
    Han(char),
    Word(&'a str),
}

/// Han characters (ZH only) and ASCII letter runs, in order.
pub(crate) fn tokens(text: &str, lang: Lang) -> impl Iterator<Item = Token<'_>> {
    let mut rest = text;
    core::iter::from_fn(move || loop {
        let (i, c) = rest.char_indices().next()?;
        if lang == Lang::Zh && is_han(c) {
            rest = &rest[i + c.len_utf8()..];
            return Some(Token::Han(c));
        }
        if c.is_ascii_alphabetic() {
            let end = rest
                .char_indices()
                .find(|&(_, c)| !is_word_char(c))
                .map_or(rest.len(), |(j, _)| j);
            let word = rest[..end].trim_end_matches('\'');
            rest = &rest[end..];
            return Some(Token::Word(word));
        }
        rest = &rest[c.len_utf8()..];
    })
}

/// Vowel-group heuristic for one English word.
///
/// Each run of vowels (`y` included) is one group; a terminal single `e` is
/// silent when the word has at least two groups; any word with a vowel
/// counts at least one.
pub fn word_syllables(word: &str) -> u32 {
    let lower = word.as_bytes();
    let mut groups = 0u32;
    let mut in_group = false;
    let mut last_group_start = 0usize;
    for (i, &b) in lower.iter().enumerate() {
        let v = is_vowel(b as char);
        if v && !in_group {
            groups += 1;
            last_group_start = i;
        }
        in_group = v;
    }
    if groups == 0 {
        return 0;
    }
    let n = lower.len();
    let silent_e =
        n >= 2 && lower[n - 1].eq_ignore_ascii_case(&b'e') && last_group_start == n - 1;
    if silent_e && groups >= 2 {
        groups -= 1;
    }
    groups.max(1)
}

/// Syllable count of `text`.
///
/// ZH: one per Han character plus the English heuristic over embedded Latin
/// runs. EN: the heuristic per word. Spelled-out initialisms undercount.
pub fn count_syllables(text: &str, lang: Lang) -> u32 {
    tokens(text, lang)
        .map(|t| match t {
            Token::Han(_) => 1,
            Token::Word(w) => word_syllables(w),
        })
        .sum()
}
