//! Corpus-level BLEU with one reference per hypothesis.
//!
//! Modified n-gram precisions (n = 1..=max_n) are pooled over the corpus,
//! combined by geometric mean and scaled by the brevity penalty
//! `exp(1 - r/c)` when the hypotheses are shorter than the references. If
//! any order has zero matches, orders `n >= 2` get add-one smoothing on
//! both numerator and denominator; a corpus with no unigram matches scores 0.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::is_han;
use crate::math::{exp, ln};
use crate::{Error, Result};

pub const DEFAULT_MAX_N: usize = 4;

/// Description of the smoothing rule, for report headers.
pub const SMOOTHING_NOTE: &str =
    "corpus BLEU, n=1..4, add-one smoothing on n>=2 precisions when any n-gram order has zero matches";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// In `[0, 100]`.
    pub score: f64,
    /// Modified precisions per order, after smoothing, in `[0, 1]`.
    pub precisions: Vec<f64>,
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
    pub smoothed: bool,
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> BTreeMap<Vec<&str>, u64> {
    let mut counts = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

pub fn bleu<R: AsRef<str>, H: AsRef<str>>(references: &[Vec<R>], hypotheses: &[Vec<H>], max_n: usize) -> Result<BleuScore> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if references.len() != hypotheses.len() {
        return Err(Error::LengthMismatch {
            left: references.len(),
            right: hypotheses.len(),
        });
    }
    if max_n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let mut matches = alloc::vec![0u64; max_n];
    let mut totals = alloc::vec![0u64; max_n];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (r, h) in references.iter().zip(hypotheses) {
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=max_n {
            let rc = ngram_counts(r, n);
            for (gram, c) in ngram_counts(h, n) {
                totals[n - 1] += c;
                matches[n - 1] += c.min(rc.get(&gram).copied().unwrap_or(0));
            }
        }
    }

    let brevity_penalty = if hyp_len >= ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        exp(1.0 - ref_len as f64 / hyp_len as f64)
    };
    let smoothed = matches[0] > 0 && matches.contains(&0);
    let precisions: Vec<f64> = (0..max_n)
        .map(|i| {
            let (m, t) = if smoothed && i > 0 {
                (matches[i] + 1, totals[i] + 1)
            } else {
                (matches[i], totals[i])
            };
            if t == 0 { 0.0 } else { m as f64 / t as f64 }
        })
        .collect();
    let score = if precisions.contains(&0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|&p| ln(p)).sum::<f64>() / max_n as f64;
        100.0 * brevity_penalty * exp(log_mean)
    };
    Ok(BleuScore {
        score,
        precisions,
        matches,
        totals,
        brevity_penalty,
        hyp_len,
        ref_len,
        smoothed,
    })
}

/// One token per non-whitespace character.
pub fn tokenize_zh(text: &str) -> Vec<String> {
    text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
}

/// Lowercased words with punctuation split off; Han characters become
/// single tokens.
pub fn tokenize_en(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() && !is_han(c) || c == '\'' && !word.is_empty() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(core::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(String::from(c));
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(s: &str) -> Vec<String> {
        tokenize_en(s)
    }

    #[test]
    fn identical_is_100() {
        let r = vec![toks("the cat sat on the mat"), tokenize_zh("月光照在窗前的地上")];
        let s = bleu(&r, &r, 4).unwrap();
        assert!((s.score - 100.0).abs() < 1e-9);
        assert!(!s.smoothed);
    }

    #[test]
    fn no_overlap_is_zero() {
        let s = bleu(&[toks("a b c d e")], &[toks("v w x y z")], 4).unwrap();
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn brevity_penalty_half_length() {
        let r = vec![toks("a b c d e f g h i j")];
        let h = vec![toks("a b c d e")];
        let s = bleu(&r, &h, 4).unwrap();
        assert!((s.brevity_penalty - libm::exp(-1.0)).abs() < 1e-12);
        assert!((s.score - 100.0 * libm::exp(-1.0)).abs() < 1e-9);
    }

    #[test]
    fn guards() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(bleu(&empty, &empty, 4).is_err());
        assert!(bleu(&[toks("a")], &[toks("a"), toks("b")], 4).is_err());
    }

    #[test]
    fn tokenizers() {
        assert_eq!(tokenize_zh("我 爱 你!"), vec!["我", "爱", "你", "!"]);
        assert_eq!(tokenize_en("Don't stop, baby."), vec!["don't", "stop", ",", "baby", "."]);
    }
}
