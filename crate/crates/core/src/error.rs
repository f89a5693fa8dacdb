use alloc::string::String;

use crate::corpus::Lang;
use crate::rewards::JudgeError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported language tag `{0}`")]
    UnsupportedLanguage(String),
    #[error("paragraph `{0}` has no lines")]
    EmptyParagraph(String),
    #[error("paragraph `{0}` has no syllabifiable content")]
    NoSyllabifiableContent(String),
    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,
    #[error("n-gram order must be in 1..=5, got {0}")]
    InvalidOrder(usize),
    #[error("perplexity scorer failed: {0}")]
    Scorer(String),
    #[error("stratification needs at least 3 profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("tier `{0}` is empty")]
    EmptyTier(&'static str),
    #[error("invalid stage spec: {0}")]
    InvalidStageSpec(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid gating band ({low}, {high})")]
    InvalidBand { low: f64, high: f64 },
    #[error("group size must be at least 2, got {0}")]
    GroupTooSmall(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("candidate pool for `{0}` needs at least two variants")]
    PoolTooSmall(String),
    #[error("variant index {index} out of range for pool of {len}")]
    VariantOutOfRange { index: usize, len: usize },
    #[error("no candidate pool for paragraph `{0}`")]
    UnknownParagraph(String),
    #[error("prompt stage must be 1, 2 or 3, got {0}")]
    InvalidPromptStage(usize),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("reward engine failure: {0}")]
    Reward(String),
    #[error("judge failure: {0}")]
    Judge(#[from] JudgeError),
    #[error("language {0:?} is not supported for this operation")]
    WrongLanguage(Lang),
}
