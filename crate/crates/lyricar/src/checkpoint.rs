//! Resumable training snapshots.

use std::path::Path;

use lyricar_core::scheduler::CurriculumDriver;
use lyricar_core::trainer::TrainerState;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl::write_atomic;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Policy logits and reference snapshot, curriculum state, RNG state and
/// the hash of the config that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_hash: String,
    /// Expected reward before the first update, for the run summary.
    #[serde(default)]
    pub initial_reward: Option<f64>,
    pub driver: CurriculumDriver,
    pub trainer: TrainerState,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &serde_json::to_vec(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "{}: version {} (expected {CHECKPOINT_VERSION})",
                path.display(),
                ck.version
            )));
        }
        Ok(ck)
    }

    /// Rejects checkpoints written under a different configuration.
    pub fn check_config(&self, config_hash: &str) -> Result<()> {
        if self.config_hash != config_hash {
            return Err(Error::Checkpoint(format!(
                "config hash {} does not match checkpoint {}",
                config_hash, self.config_hash
            )));
        }
        Ok(())
    }
}
