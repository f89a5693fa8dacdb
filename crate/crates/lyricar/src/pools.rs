//! Candidate pools for the synthetic policy.

use std::collections::BTreeMap;
use std::path::Path;

use lyricar_core::corpus::Paragraph;
use lyricar_core::policy::{CandidatePool, PoolGenerator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl::read_jsonl;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolRecord {
    pub paragraph_id: String,
    pub variants: Vec<String>,
}

/// Per-paragraph pool seed: independent of corpus order.
pub fn pool_seed(seed: u64, paragraph_id: &str) -> u64 {
    lyricar_core::stable_hash(&[b"pool", &seed.to_le_bytes(), paragraph_id.as_bytes()])
}

/// Generates one uniform-logit pool per paragraph.
pub fn generate_pools(paragraphs: &[Paragraph], pool_size: usize, boundary: &str, seed: u64) -> Result<Vec<CandidatePool>> {
    let generator = PoolGenerator::new();
    paragraphs
        .iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(pool_seed(seed, &p.id));
            Ok(generator.generate(p, pool_size, boundary, &mut rng)?)
        })
        .collect()
}

/// Loads pools from JSONL and checks that every paragraph has one.
pub fn read_pools(path: &Path, paragraphs: &[Paragraph]) -> Result<Vec<CandidatePool>> {
    let records: Vec<PoolRecord> = read_jsonl(path)?;
    let mut by_id: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, r) in records.into_iter().enumerate() {
        if by_id.insert(r.paragraph_id.clone(), r.variants).is_some() {
            return Err(Error::DuplicateId { id: r.paragraph_id, line: i + 1 });
        }
    }
    paragraphs
        .iter()
        .map(|p| {
            let variants = by_id
                .remove(&p.id)
                .ok_or_else(|| Error::Config(format!("{}: no pool for paragraph {}", path.display(), p.id)))?;
            Ok(CandidatePool::new(p.id.clone(), variants)?)
        })
        .collect()
}
