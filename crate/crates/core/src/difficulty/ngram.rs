//! Character n-gram language model with add-one smoothing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Paragraph;
use crate::math::{exp, ln};
use crate::{Error, Result};

/// Backend that assigns a perplexity to a paragraph.
pub trait PerplexityScorer {
    fn perplexity(&self, paragraph: &Paragraph) -> Result<f64>;
}

const BOS: char = '\u{2}';

fn normalize(text: &str) -> impl Iterator<Item = char> + '_ {
    text.chars().flat_map(char::to_lowercase)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct ContextCounts {
    total: u64,
    next: BTreeMap<char, u64>,
}

/// Each line is scored independently, padded on the left with a
/// start-of-line marker. Probabilities are
/// `(count(ctx, c) + 1) / (count(ctx) + V)` with `V` the training
/// character vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharNgramModel {
    order: usize,
    vocab: BTreeSet<char>,
    contexts: BTreeMap<String, ContextCounts>,
}

impl CharNgramModel {
    pub fn train(corpus: &[Paragraph], order: usize) -> Result<Self> {
        if !(1..=5).contains(&order) {
            return Err(Error::InvalidOrder(order));
        }
        let mut model = CharNgramModel {
            order,
            vocab: BTreeSet::new(),
            contexts: BTreeMap::new(),
        };
        for line in corpus.iter().flat_map(|p| &p.lines) {
            model.observe(&line.text);
        }
        if model.vocab.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(model)
    }

    fn observe(&mut self, text: &str) {
        let mut history: Vec<char> = alloc::vec![BOS; self.order - 1];
        for c in normalize(text) {
            self.vocab.insert(c);
            let ctx = self.context_key(&history);
            let counts = self.contexts.entry(ctx).or_default();
            counts.total += 1;
            *counts.next.entry(c).or_default() += 1;
            if self.order > 1 {
                history.remove(0);
                history.push(c);
            }
        }
    }

    fn context_key(&self, history: &[char]) -> String {
        history.iter().collect()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Smoothed conditional probability of `c` after `history`
    /// (the last `order - 1` characters, BOS-padded).
    pub fn prob(&self, history: &[char], c: char) -> f64 {
        let v = self.vocab.len() as f64;
        let key = self.context_key(history);
        let (seen, total) = match self.contexts.get(&key) {
            Some(cc) => (cc.next.get(&c).copied().unwrap_or(0), cc.total),
            None => (0, 0),
        };
        (seen as f64 + 1.0) / (total as f64 + v)
    }

    /// Natural-log probability and scored character count of one line.
    pub fn line_log_prob(&self, text: &str) -> (f64, usize) {
        let mut history: Vec<char> = alloc::vec![BOS; self.order - 1];
        let mut lp = 0.0;
        let mut n = 0;
        for c in normalize(text) {
            lp += ln(self.prob(&history, c));
            n += 1;
            if self.order > 1 {
                history.remove(0);
                history.push(c);
            }
        }
        (lp, n)
    }

    /// Perplexity over several lines: `exp(-sum log p / chars)`.
    pub fn perplexity_of_lines<'a>(&self, lines: impl IntoIterator<Item = &'a str>) -> Option<f64> {
        let (mut lp, mut n) = (0.0, 0usize);
        for line in lines {
            let (l, k) = self.line_log_prob(line);
            lp += l;
            n += k;
        }
        (n > 0).then(|| exp(-lp / n as f64))
    }
}

impl PerplexityScorer for CharNgramModel {
    fn perplexity(&self, paragraph: &Paragraph) -> Result<f64> {
        if paragraph.total_syllables() == 0 {
            return Err(Error::NoSyllabifiableContent(paragraph.id.clone()));
        }
        self.perplexity_of_lines(paragraph.lines.iter().map(|l| l.text.as_str()))
            .ok_or_else(|| Error::NoSyllabifiableContent(paragraph.id.clone()))
    }
}

/// Trains the built-in fallback scorer.
pub fn train_fallback_lm(corpus: &[Paragraph], order: usize) -> Result<CharNgramModel> {
    CharNgramModel::train(corpus, order)
}
