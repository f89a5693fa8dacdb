#![allow(dead_code)]

use std::path::{Path, PathBuf};

use lyricar::config::{ModeName, RunConfig};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// The toy config with its output redirected to `dir`.
pub fn toy_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&fixture("toy.toml")).unwrap();
    cfg.output.dir = dir.to_path_buf();
    cfg
}

/// Toy config for the scheduling comparison: learning rates high enough that
/// stage 1 climbs for about ten epochs and then flattens.
pub fn plateau_config(dir: &Path, seed: u64, mode: ModeName) -> RunConfig {
    let mut cfg = toy_config(dir);
    cfg.seed = seed;
    cfg.grpo.learning_rates = vec![3.0, 3.0, 3.0];
    cfg.scheduler.mode = mode;
    cfg.scheduler.epochs_per_stage = 30;
    cfg.epoch_budget = 120;
    cfg.validate().unwrap();
    cfg
}
