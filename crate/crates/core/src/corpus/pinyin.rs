//! Embedded character-to-pinyin table and rhyme-family normalization.

use alloc::string::String;

include!(concat!(env!("OUT_DIR"), "/pinyin_table.rs"));

/// Rhyme families, one per traditional rhyme track: glide and medial
/// variants of a final collapse into the same family.
pub const FAMILIES: [&str; 13] = [
    "a", "o", "ie", "i", "u", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng",
];

pub fn table_version() -> u32 {
    TABLE_VERSION
}

pub fn table_len() -> usize {
    TABLE.len()
}

/// Toneless default reading, `v` standing for u-umlaut.
pub fn pinyin_of(c: char) -> Option<&'static str> {
    TABLE
        .binary_search_by_key(&c, |&(k, _)| k)
        .ok()
        .map(|i| TABLE[i].1)
}

pub(crate) fn table() -> &'static [(char, &'static str)] {
    TABLE
}

const INITIALS: [&str; 23] = [
    "zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j", "q", "x", "r",
    "z", "c", "s", "y", "w",
];

/// Full final (yunmu) of a toneless syllable, with spelling abbreviations
/// expanded (`iu` -> `iou`, `ui` -> `uei`, `un` -> `uen`), `y`/`w` spellings
/// restored, and `u` after j/q/x written as `v`. The apical vowel after
/// z/c/s/zh/ch/sh/r is returned as `-i`.
pub fn pinyin_final(syllable: &str) -> Option<String> {
    let s: String = syllable
        .chars()
        .map(|c| if c == 'ü' { 'v' } else { c.to_ascii_lowercase() })
        .collect();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    // syllabic nasals (n, ng, m, hm, hng) have no vowel final
    if !s.bytes().any(|b| matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'v')) {
        return None;
    }
    let initial = INITIALS
        .iter()
        .find(|i| s.starts_with(**i) && s.len() > i.len())
        .copied()
        .unwrap_or("");
    let rest = &s[initial.len()..];
    let mut fin = String::new();
    match initial {
        "y" => match rest {
            "i" | "in" | "ing" => fin.push_str(rest),
            "u" => fin.push('v'),
            "ue" | "uan" | "un" => {
                fin.push('v');
                fin.push_str(&rest[1..]);
            }
            _ => {
                fin.push('i');
                fin.push_str(rest);
            }
        },
        "w" => {
            if rest != "u" {
                fin.push('u');
            }
            fin.push_str(rest);
        }
        "j" | "q" | "x" if rest.starts_with('u') => {
            fin.push('v');
            fin.push_str(&rest[1..]);
        }
        _ => fin.push_str(rest),
    }
    match fin.as_str() {
        "iu" => fin = "iou".into(),
        "ui" => fin = "uei".into(),
        "un" => fin = "uen".into(),
        "i" if matches!(initial, "z" | "c" | "s" | "zh" | "ch" | "sh" | "r") => fin = "-i".into(),
        _ => {}
    }
    Some(fin)
}

/// Rhyme family tag for a full final.
pub fn rhyme_family(fin: &str) -> Option<&'static str> {
    Some(match fin {
        "a" | "ia" | "ua" => "a",
        "o" | "uo" | "e" | "io" => "o",
        "ie" | "ve" | "ue" => "ie",
        "i" | "v" | "er" | "-i" => "i",
        "u" => "u",
        "ai" | "uai" => "ai",
        "ei" | "uei" => "ei",
        "ao" | "iao" => "ao",
        "ou" | "iou" => "ou",
        "an" | "ian" | "uan" | "van" => "an",
        "en" | "in" | "uen" | "vn" => "en",
        "ang" | "iang" | "uang" => "ang",
        "eng" | "ing" | "ueng" | "ong" | "iong" => "eng",
        _ => return None,
    })
}

/// Family nucleus used by graded similarity.
pub(crate) fn family_nucleus(tag: &str) -> Option<char> {
    Some(match tag {
        "a" | "ai" | "ao" | "an" | "ang" => 'a',
        "o" | "ou" => 'o',
        "ie" | "ei" | "en" | "eng" => 'e',
        "i" => 'i',
        "u" => 'u',
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_frequent_characters() {
        assert!(table_len() >= 3500);
        assert_eq!(table_version(), 1);
        assert_eq!(pinyin_of('光'), Some("guang"));
        assert_eq!(pinyin_of('月'), Some("yue"));
        assert_eq!(pinyin_of('☃'), None);
    }

    #[test]
    fn finals() {
        let cases = [
            ("guang", "uang"),
            ("yue", "ve"),
            ("you", "iou"),
            ("liu", "iou"),
            ("gui", "uei"),
            ("lun", "uen"),
            ("jun", "vn"),
            ("xue", "ve"),
            ("lv", "v"),
            ("nv", "v"),
            ("yi", "i"),
            ("ying", "ing"),
            ("yang", "iang"),
            ("wu", "u"),
            ("wang", "uang"),
            ("wei", "uei"),
            ("shi", "-i"),
            ("zi", "-i"),
            ("er", "er"),
            ("ai", "ai"),
            ("ang", "ang"),
            ("e", "e"),
            ("zhong", "ong"),
            ("xiong", "iong"),
        ];
        for (syl, fin) in cases {
            assert_eq!(pinyin_final(syl).as_deref(), Some(fin), "{syl}");
        }
        assert_eq!(pinyin_final("n"), None);
        assert_eq!(pinyin_final("hng"), None);
    }

    #[test]
    fn glide_variants_share_a_family() {
        for f in ["ang", "iang", "uang"] {
            assert_eq!(rhyme_family(f), Some("ang"));
        }
        assert_eq!(rhyme_family("ong"), Some("eng"));
        assert_eq!(rhyme_family("xyz"), None);
    }

    #[test]
    fn every_table_reading_resolves_or_is_nasal() {
        for &(c, py) in table() {
            match pinyin_final(py) {
                Some(f) => assert!(rhyme_family(&f).is_some(), "{c} {py} -> {f}"),
                None => assert!(matches!(py, "n" | "ng" | "m" | "hm" | "hng"), "{c} {py}"),
            }
        }
    }

    #[test]
    fn every_family_has_a_nucleus() {
        for f in FAMILIES {
            assert!(family_nucleus(f).is_some());
        }
    }
}
