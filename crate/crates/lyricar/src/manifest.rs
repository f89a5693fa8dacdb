//! Difficulty profiles and stage manifests on disk.

use std::collections::BTreeMap;
use std::path::Path;

use lyricar_core::difficulty::{StageEntry, Tier};
use lyricar_core::trainer::StageData;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl::{read_jsonl, write_jsonl};

/// One line of a stage manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub paragraph_id: String,
    pub tier: Tier,
    pub stage: usize,
}

pub fn manifest_entries(stages: &[Vec<StageEntry>]) -> Vec<ManifestEntry> {
    stages
        .iter()
        .enumerate()
        .flat_map(|(i, entries)| {
            entries.iter().map(move |e| ManifestEntry { paragraph_id: e.paragraph_id.clone(), tier: e.tier, stage: i + 1 })
        })
        .collect()
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    write_jsonl(path, entries)
}

/// Reads a manifest and groups it by stage, preserving file order.
pub fn read_manifest(path: &Path, n_stages: usize) -> Result<Vec<Vec<ManifestEntry>>> {
    let entries: Vec<ManifestEntry> = read_jsonl(path)?;
    group_by_stage(entries, n_stages)
}

pub fn group_by_stage(entries: Vec<ManifestEntry>, n_stages: usize) -> Result<Vec<Vec<ManifestEntry>>> {
    let mut out = vec![Vec::new(); n_stages];
    for e in entries {
        let slot = e
            .stage
            .checked_sub(1)
            .and_then(|i| out.get_mut(i))
            .ok_or_else(|| Error::Config(format!("manifest stage {} outside 1..={n_stages}", e.stage)))?;
        slot.push(e);
    }
    if let Some(i) = out.iter().position(Vec::is_empty) {
        return Err(Error::Config(format!("manifest has no entries for stage {}", i + 1)));
    }
    Ok(out)
}

/// Stage datasets with a seeded validation slice per stage.
pub fn stage_data(stages: &[Vec<ManifestEntry>], fraction: f64, seed: u64) -> Result<Vec<StageData>> {
    stages
        .iter()
        .enumerate()
        .map(|(i, entries)| {
            let ids = entries.iter().map(|e| e.paragraph_id.clone()).collect();
            let s = lyricar_core::stable_hash(&[b"validation", &seed.to_le_bytes(), &(i as u64).to_le_bytes()]);
            Ok(StageData::with_validation_slice(ids, fraction, s)?)
        })
        .collect()
}

/// Tier counts per stage, for logs and summaries.
pub fn tier_table(stages: &[Vec<ManifestEntry>]) -> Vec<BTreeMap<String, usize>> {
    stages
        .iter()
        .map(|entries| {
            let mut m: BTreeMap<String, usize> = Tier::ALL.iter().map(|t| (t.name().to_string(), 0)).collect();
            for e in entries {
                *m.entry(e.tier.name().to_string()).or_default() += 1;
            }
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, stage: usize) -> ManifestEntry {
        ManifestEntry { paragraph_id: id.into(), tier: Tier::Easy, stage }
    }

    #[test]
    fn grouping_checks_stage_range_and_coverage() {
        let g = group_by_stage(vec![entry("a", 2), entry("b", 1), entry("c", 2)], 2).unwrap();
        assert_eq!(g[1].iter().map(|e| e.paragraph_id.as_str()).collect::<Vec<_>>(), ["a", "c"]);
        assert!(group_by_stage(vec![entry("a", 3)], 2).is_err());
        assert!(group_by_stage(vec![entry("a", 1)], 2).is_err());
    }

    #[test]
    fn validation_slices_are_seeded() {
        let stages = vec![(0..40).map(|i| entry(&format!("p{i}"), 1)).collect::<Vec<_>>()];
        let a = stage_data(&stages, 0.05, 1).unwrap();
        assert_eq!(a[0].validation.len(), 2);
        assert_eq!(a, stage_data(&stages, 0.05, 1).unwrap());
    }
}
