//! Lexicon-based difficulty features and their z-score combination.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_han, rhyme_similarity, Lang, Paragraph, SimilarityMode};
use crate::math::{mean, population_variance, sqrt};
use crate::{Error, Result};

/// Subordinators and conjunctions counted toward syntactic depth.
const EN_FUNCTION_WORDS: &[&str] = &[
    "after", "although", "and", "as", "because", "before", "but", "if", "nor", "once", "or",
    "since", "so", "than", "that", "though", "till", "unless", "until", "when", "whenever",
    "where", "whereas", "wherever", "whether", "which", "while", "who", "whom", "whose", "yet",
];

const ZH_FUNCTION_WORDS: &[&str] = &[
    "因为", "所以", "但是", "可是", "虽然", "如果", "假如", "即使", "而且", "或者", "然后",
    "于是", "只要", "只有", "除非", "尽管", "不过", "和", "与", "而", "但", "或", "若", "且",
];

const COMMAS: &[char] = &[',', '，', '、', ';', '；'];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinguisticFeatures {
    pub lexical_diversity: f64,
    pub syntactic_depth: f64,
    pub rhyme_density: f64,
}

fn lexical_tokens(text: &str, lang: Lang) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if lang == Lang::Zh && is_han(c) {
            if !word.is_empty() {
                out.push(core::mem::take(&mut word));
            }
            out.push(c.into());
        } else if c.is_alphanumeric() || c == '\'' {
            word.extend(c.to_lowercase());
        } else if !word.is_empty() {
            out.push(core::mem::take(&mut word));
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

fn function_word_count(text: &str, lang: Lang) -> usize {
    let commas = text.chars().filter(|c| COMMAS.contains(c)).count();
    let words = match lang {
        Lang::En => lexical_tokens(text, lang)
            .iter()
            .filter(|w| EN_FUNCTION_WORDS.binary_search(&w.as_str()).is_ok())
            .count(),
        Lang::Zh => {
            // longest match first so 但是 is not also counted as 但
            let mut count = 0;
            let mut rest = text;
            'outer: while let Some(c) = rest.chars().next() {
                for fw in ZH_FUNCTION_WORDS {
                    if rest.starts_with(fw) {
                        count += 1;
                        rest = &rest[fw.len()..];
                        continue 'outer;
                    }
                }
                rest = &rest[c.len_utf8()..];
            }
            count
        }
    };
    commas + words
}

/// Lexical diversity (type/token ratio), mean per-line function-word and
/// comma count, and mean binary rhyme similarity of adjacent lines.
pub fn linguistic_features(paragraph: &Paragraph) -> LinguisticFeatures {
    let lang = paragraph.lang;
    let tokens: Vec<String> = paragraph
        .lines
        .iter()
        .flat_map(|l| lexical_tokens(&l.text, lang))
        .collect();
    let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    let lexical_diversity = if tokens.is_empty() {
        0.0
    } else {
        distinct.len() as f64 / tokens.len() as f64
    };

    let depths: Vec<f64> = paragraph
        .lines
        .iter()
        .map(|l| function_word_count(&l.text, lang) as f64)
        .collect();

    let sims: Vec<f64> = paragraph
        .lines
        .windows(2)
        .map(|w| rhyme_similarity(&w[0].rhyme_class, &w[1].rhyme_class, SimilarityMode::Binary))
        .collect();

    LinguisticFeatures {
        lexical_diversity,
        syntactic_depth: mean(&depths),
        rhyme_density: mean(&sims),
    }
}

/// All four difficulty signals of one paragraph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub perplexity: f64,
    pub lexical_diversity: f64,
    pub syntactic_depth: f64,
    pub rhyme_density: f64,
}

impl FeatureVector {
    pub fn new(perplexity: f64, f: LinguisticFeatures) -> Self {
        FeatureVector {
            perplexity,
            lexical_diversity: f.lexical_diversity,
            syntactic_depth: f.syntactic_depth,
            rhyme_density: f.rhyme_density,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [
            self.perplexity,
            self.lexical_diversity,
            self.syntactic_depth,
            self.rhyme_density,
        ]
    }
}

/// Weights for (perplexity, lexical diversity, syntactic depth, rhyme density).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyWeights(pub [f64; 4]);

impl Default for DifficultyWeights {
    fn default() -> Self {
        DifficultyWeights([1.0; 4])
    }
}

impl DifficultyWeights {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights("difficulty weights must be finite and non-negative".into()));
        }
        if self.0.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidWeights("difficulty weights must sum to a positive value".into()));
        }
        Ok(())
    }
}

/// Corpus means and population standard deviations of each feature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub mean: [f64; 4],
    pub std_dev: [f64; 4],
}

impl CorpusStats {
    pub fn from_features(features: &[FeatureVector]) -> Self {
        let mut mean_out = [0.0; 4];
        let mut std_out = [0.0; 4];
        for j in 0..4 {
            let col: Vec<f64> = features.iter().map(|f| f.as_array()[j]).collect();
            mean_out[j] = mean(&col);
            std_out[j] = sqrt(population_variance(&col));
        }
        CorpusStats {
            mean: mean_out,
            std_dev: std_out,
        }
    }

    /// Weighted sum of z-scores with rhyme density negated. A feature with
    /// zero corpus variance contributes 0.
    pub fn composite(&self, f: &FeatureVector, weights: &DifficultyWeights) -> f64 {
        const SIGN: [f64; 4] = [1.0, 1.0, 1.0, -1.0];
        let x = f.as_array();
        (0..4)
            .map(|j| {
                let z = if self.std_dev[j] > 0.0 {
                    (x[j] - self.mean[j]) / self.std_dev[j]
                } else {
                    0.0
                };
                SIGN[j] * weights.0[j] * z
            })
            .sum()
    }
}

/// Composite difficulty of every paragraph, relative to the given corpus.
pub fn composite_difficulty(features: &[FeatureVector], weights: &DifficultyWeights) -> Result<Vec<f64>> {
    weights.validate()?;
    let stats = CorpusStats::from_features(features);
    Ok(features.iter().map(|f| stats.composite(f, weights)).collect())
}
