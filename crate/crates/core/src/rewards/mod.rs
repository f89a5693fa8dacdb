//! The four reward components and their weighted total.
//!
//! Formulas bind to what they compute: the rhyme reward is the mean
//! similarity of adjacent line-final rhyme classes, the rhythm reward is
//! one minus the relative per-line syllable deviation. Format and rhythm
//! are clamped to `[0, 1]`.

mod judge;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    candidate_lines, rhyme_similarity, segment_candidate, Lang, Line, Paragraph, SimilarityMode,
    DEFAULT_BOUNDARY,
};
use crate::math::{abs, clamp01, mean, round};
use crate::{Error, Result};

pub use judge::{parse_verdict, JudgeClient, JudgeError, StubJudge, Verdict};

/// Format compliance.
///
/// With a line-count mismatch the reward is `max(0, 1 - |Nc - N| / N)`.
/// Otherwise it is `1 - sum |L_i - L| / (N * L)` clamped to `[0, 1]`,
/// where `L_i` is the non-whitespace length of candidate segment `i` and
/// `L = max(1, round(length_ratio * mean source syllables))`.
pub fn format_reward(source: &Paragraph, candidate_text: &str, boundary_token: &str, length_ratio: f64) -> f64 {
    if candidate_text.trim().is_empty() || source.is_empty() {
        return 0.0;
    }
    let n = source.len() as f64;
    let segments = segment_candidate(candidate_text, boundary_token);
    if segments.len() != source.len() {
        let diff = abs(segments.len() as f64 - n);
        return (1.0 - diff / n).max(0.0);
    }
    let mean_syl = mean(&source.syllable_counts().iter().map(|&s| f64::from(s)).collect::<Vec<_>>());
    let target = round(length_ratio * mean_syl).max(1.0);
    let deviation: f64 = segments
        .iter()
        .map(|s| abs(s.chars().filter(|c| !c.is_whitespace()).count() as f64 - target))
        .sum();
    clamp01(1.0 - deviation / (n * target))
}

/// Rhythm compliance: `1 - sum |d_i - d^_i| / sum d^_i`, clamped, where
/// `d^` are source and `d` candidate syllable counts. Zero when the line
/// counts differ or the source has no syllables.
pub fn rhythm_reward(source: &Paragraph, candidate: &[Line]) -> f64 {
    if candidate.len() != source.len() {
        return 0.0;
    }
    let budget: u32 = source.total_syllables();
    if budget == 0 {
        return 0.0;
    }
    let deviation: u32 = source
        .lines
        .iter()
        .zip(candidate)
        .map(|(s, c)| s.syllable_count.abs_diff(c.syllable_count))
        .sum();
    clamp01(1.0 - f64::from(deviation) / f64::from(budget))
}

/// Rhyme compliance: mean similarity over the `N - 1` adjacent line-final
/// pairs. A single line scores 0.
pub fn rhyme_reward(candidate: &[Line], mode: SimilarityMode) -> f64 {
    if candidate.len() < 2 {
        return 0.0;
    }
    let sims: Vec<f64> = candidate
        .windows(2)
        .map(|w| rhyme_similarity(&w[0].rhyme_class, &w[1].rhyme_class, mode))
        .collect();
    mean(&sims)
}

/// Component weights for format, rhythm, rhyme and text quality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub format: f64,
    pub rhythm: f64,
    pub rhyme: f64,
    pub text_quality: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights::from([0.25; 4])
    }
}

impl From<[f64; 4]> for RewardWeights {
    fn from(w: [f64; 4]) -> Self {
        RewardWeights {
            format: w[0],
            rhythm: w[1],
            rhyme: w[2],
            text_quality: w[3],
        }
    }
}

impl RewardWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.format, self.rhythm, self.rhyme, self.text_quality]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidWeights("reward weights must be finite and non-negative".into()));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidWeights("reward weights must sum to a positive value".into()));
        }
        Ok(())
    }
}

/// Weighted mean of the three automatic components; the basis for gating.
pub fn automatic_subscore(fmt: f64, rtm: f64, rym: f64, weights: &RewardWeights) -> Result<f64> {
    let denom = weights.format + weights.rhythm + weights.rhyme;
    if denom <= 0.0 {
        return Err(Error::InvalidWeights("format, rhythm and rhyme weights sum to zero".into()));
    }
    Ok((weights.format * fmt + weights.rhythm * rtm + weights.rhyme * rym) / denom)
}

/// Subscore interval inside which the judge is consulted (inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatingBand {
    pub low: f64,
    pub high: f64,
}

impl Default for GatingBand {
    fn default() -> Self {
        GatingBand { low: 0.5, high: 0.7 }
    }
}

impl GatingBand {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let band = GatingBand { low, high };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.low < self.high && (0.0..=1.0).contains(&self.low) && (0.0..=1.0).contains(&self.high);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidBand { low: self.low, high: self.high })
        }
    }

    pub fn contains(&self, subscore: f64) -> bool {
        subscore >= self.low && subscore <= self.high
    }
}

/// Text-quality score assigned outside the gating band.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutOfBand {
    /// -1 below the band, +1 above it.
    #[default]
    Polarized,
    /// 0 on both sides.
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxtqSource {
    Judge,
    BandLow,
    BandHigh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextQuality {
    pub score: i8,
    pub source: TxtqSource,
    pub judge_called: bool,
    /// Set when the judge failed and the score fell back to 0.
    pub degraded: Option<String>,
}

/// Judge-gated text quality. Only in-band subscores reach the judge; a
/// judge failure yields 0 with a degradation note instead of an error.
pub fn text_quality(
    source: &Paragraph,
    candidate: &str,
    subscore: f64,
    band: &GatingBand,
    out_of_band: OutOfBand,
    judge: &dyn JudgeClient,
    template_id: &str,
) -> TextQuality {
    let outside = |score: i8, source| TextQuality {
        score: if out_of_band == OutOfBand::Neutral { 0 } else { score },
        source,
        judge_called: false,
        degraded: None,
    };
    if subscore < band.low {
        return outside(-1, TxtqSource::BandLow);
    }
    if subscore > band.high {
        return outside(1, TxtqSource::BandHigh);
    }
    match judge.judge(source, candidate, template_id) {
        Ok(v) => TextQuality {
            score: v.score(),
            source: TxtqSource::Judge,
            judge_called: true,
            degraded: None,
        },
        Err(e) => TextQuality {
            score: 0,
            source: TxtqSource::Judge,
            judge_called: true,
            degraded: Some(e.to_string()),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub fmt: f64,
    pub rtm: f64,
    pub rym: f64,
    pub txtq: i8,
    pub txtq_source: TxtqSource,
    pub total: f64,
}

/// `l1*fmt + l2*rtm + l3*rym + l4*txtq`.
pub fn total_reward(fmt: f64, rtm: f64, rym: f64, txtq: f64, weights: &RewardWeights) -> f64 {
    weights.format * fmt + weights.rhythm * rtm + weights.rhyme * rym + weights.text_quality * txtq
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub weights: RewardWeights,
    pub band: GatingBand,
    pub boundary: String,
    pub length_ratio: f64,
    pub rhyme_mode: SimilarityMode,
    pub out_of_band: OutOfBand,
    pub target_lang: Lang,
    pub template_id: String,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            weights: RewardWeights::default(),
            band: GatingBand::default(),
            boundary: DEFAULT_BOUNDARY.to_string(),
            length_ratio: 1.0,
            rhyme_mode: SimilarityMode::Binary,
            out_of_band: OutOfBand::Polarized,
            target_lang: Lang::Zh,
            template_id: "judge_v1".to_string(),
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.weights.format + self.weights.rhythm + self.weights.rhyme <= 0.0 {
            return Err(Error::InvalidWeights("format, rhythm and rhyme weights sum to zero".into()));
        }
        self.band.validate()?;
        if !(self.length_ratio.is_finite() && self.length_ratio > 0.0) {
            return Err(Error::InvalidWeights("length ratio must be positive".into()));
        }
        if self.boundary.is_empty() {
            return Err(Error::InvalidWeights("boundary token must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub breakdown: RewardBreakdown,
    pub judge_called: bool,
    pub degraded: Option<String>,
}

/// Anything that turns a (source, candidate) pair into a reward.
pub trait CandidateScorer {
    fn score(&self, source: &Paragraph, candidate: &str) -> Result<ScoredCandidate>;
}

/// Full reward computation for one candidate against its source.
pub struct RewardEngine<'j> {
    config: RewardConfig,
    judge: &'j dyn JudgeClient,
}

impl<'j> RewardEngine<'j> {
    pub fn new(config: RewardConfig, judge: &'j dyn JudgeClient) -> Result<Self> {
        config.validate()?;
        Ok(RewardEngine { config, judge })
    }

    pub fn config(&self) -> &RewardConfig {
        &self.config
    }
}

impl CandidateScorer for RewardEngine<'_> {
    fn score(&self, source: &Paragraph, candidate: &str) -> Result<ScoredCandidate> {
        let c = &self.config;
        let lines = candidate_lines(candidate, &c.boundary, c.target_lang);
        let fmt = format_reward(source, candidate, &c.boundary, c.length_ratio);
        let rtm = rhythm_reward(source, &lines);
        let rym = rhyme_reward(&lines, c.rhyme_mode);
        let sub = automatic_subscore(fmt, rtm, rym, &c.weights)?;
        let tq = text_quality(source, candidate, sub, &c.band, c.out_of_band, self.judge, &c.template_id);
        let total = total_reward(fmt, rtm, rym, f64::from(tq.score), &c.weights);
        Ok(ScoredCandidate {
            breakdown: RewardBreakdown {
                fmt,
                rtm,
                rym,
                txtq: tq.score,
                txtq_source: tq.source,
                total,
            },
            judge_called: tq.judge_called,
            degraded: tq.degraded,
        })
    }
}

impl<S: CandidateScorer + ?Sized> CandidateScorer for &S {
    fn score(&self, source: &Paragraph, candidate: &str) -> Result<ScoredCandidate> {
        (**self).score(source, candidate)
    }
}
