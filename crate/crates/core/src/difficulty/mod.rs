//! Difficulty scoring, stratification and stage construction.

mod features;
mod ngram;
mod stages;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Paragraph;
use crate::Result;

pub use features::{
    composite_difficulty, linguistic_features, CorpusStats, DifficultyWeights, FeatureVector,
    LinguisticFeatures,
};
pub use ngram::{train_fallback_lm, CharNgramModel, PerplexityScorer};
pub use stages::{
    build_stage_dataset, stratify, tier_counts, tier_sizes, StageEntry, StageSpec, Tier, Tiers,
    FULL_STAGE_SIZE, STAGE_PROPORTIONS,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyProfile {
    pub paragraph_id: String,
    pub perplexity: f64,
    pub lexical_diversity: f64,
    pub syntactic_depth: f64,
    pub rhyme_density: f64,
    pub composite: f64,
    pub tier: Tier,
}

impl DifficultyProfile {
    pub fn features(&self) -> FeatureVector {
        FeatureVector {
            perplexity: self.perplexity,
            lexical_diversity: self.lexical_diversity,
            syntactic_depth: self.syntactic_depth,
            rhyme_density: self.rhyme_density,
        }
    }
}

/// Scores every paragraph, combines features and assigns tiers.
pub fn profile_corpus(
    paragraphs: &[Paragraph],
    scorer: &dyn PerplexityScorer,
    weights: &DifficultyWeights,
) -> Result<(Vec<DifficultyProfile>, Tiers)> {
    let features = paragraphs
        .iter()
        .map(|p| Ok(FeatureVector::new(scorer.perplexity(p)?, linguistic_features(p))))
        .collect::<Result<Vec<_>>>()?;
    let composite = composite_difficulty(&features, weights)?;
    let tiers = stratify(paragraphs.iter().map(|p| p.id.as_str()).zip(composite.iter().copied()))?;
    let tier_of: BTreeMap<&str, Tier> = Tier::ALL
        .into_iter()
        .flat_map(|t| tiers.get(t).iter().map(move |id| (id.as_str(), t)))
        .collect();
    let profiles = paragraphs
        .iter()
        .zip(features)
        .zip(composite)
        .map(|((p, f), c)| DifficultyProfile {
            paragraph_id: p.id.clone(),
            perplexity: f.perplexity,
            lexical_diversity: f.lexical_diversity,
            syntactic_depth: f.syntactic_depth,
            rhyme_density: f.rhyme_density,
            composite: c,
            tier: tier_of[p.id.as_str()],
        })
        .collect();
    Ok((profiles, tiers))
}
