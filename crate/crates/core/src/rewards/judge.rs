//! Categorical text-quality judge: verdicts, label extraction, stub backend.

use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::corpus::Paragraph;
use crate::stable_hash;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Poor,
    Acceptable,
    Good,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::Poor, Verdict::Acceptable, Verdict::Good];

    pub fn score(self) -> i8 {
        match self {
            Verdict::Poor => -1,
            Verdict::Acceptable => 0,
            Verdict::Good => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Poor => "poor",
            Verdict::Acceptable => "acceptable",
            Verdict::Good => "good",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JudgeError {
    #[error("no verdict label in judge response: {0:?}")]
    Parse(String),
    #[error("judge transport error: {0}")]
    Transport(String),
    #[error("judge failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
}

/// Finds the earliest of `poor`, `acceptable`, `good` in `text`,
/// case-insensitively.
pub fn parse_verdict(text: &str) -> Result<Verdict, JudgeError> {
    let lower = text.to_lowercase();
    Verdict::ALL
        .into_iter()
        .filter_map(|v| lower.find(v.label()).map(|pos| (pos, v)))
        .min_by_key(|&(pos, _)| pos)
        .map(|(_, v)| v)
        .ok_or_else(|| JudgeError::Parse(text.to_string()))
}

pub trait JudgeClient {
    fn judge(&self, source: &Paragraph, candidate: &str, template_id: &str) -> Result<Verdict, JudgeError>;
}

impl<J: JudgeClient + ?Sized> JudgeClient for &J {
    fn judge(&self, source: &Paragraph, candidate: &str, template_id: &str) -> Result<Verdict, JudgeError> {
        (**self).judge(source, candidate, template_id)
    }
}

/// Deterministic judge: the verdict is a hash of `(source.id, candidate)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubJudge {
    pub salt: u64,
}

impl StubJudge {
    pub fn new(salt: u64) -> Self {
        StubJudge { salt }
    }
}

impl JudgeClient for StubJudge {
    fn judge(&self, source: &Paragraph, candidate: &str, _template_id: &str) -> Result<Verdict, JudgeError> {
        let h = stable_hash(&[source.id.as_bytes(), candidate.as_bytes(), &self.salt.to_le_bytes()]);
        Ok(Verdict::ALL[(h % 3) as usize])
    }
}
