//! Tercile stratification and staged dataset sampling.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::{abs, floor, round};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Easy,
    Medium,
    Hard,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Easy, Tier::Medium, Tier::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Easy => "easy",
            Tier::Medium => "medium",
            Tier::Hard => "hard",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Paragraph ids per tier, each list in ascending difficulty order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiers {
    pub easy: Vec<String>,
    pub medium: Vec<String>,
    pub hard: Vec<String>,
}

impl Tiers {
    pub fn get(&self, tier: Tier) -> &[String] {
        match tier {
            Tier::Easy => &self.easy,
            Tier::Medium => &self.medium,
            Tier::Hard => &self.hard,
        }
    }

    fn get_mut(&mut self, tier: Tier) -> &mut Vec<String> {
        match tier {
            Tier::Easy => &mut self.easy,
            Tier::Medium => &mut self.medium,
            Tier::Hard => &mut self.hard,
        }
    }

    pub fn tier_of(&self, id: &str) -> Option<Tier> {
        Tier::ALL.into_iter().find(|&t| self.get(t).iter().any(|x| x == id))
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.easy.len(), self.medium.len(), self.hard.len()]
    }

    pub fn push(&mut self, tier: Tier, id: String) {
        self.get_mut(tier).push(id);
    }
}

/// Tier sizes for `n` items: equal thirds, the remainder going to the lower
/// tier at each boundary (10 -> 4/3/3, 11 -> 4/4/3).
pub fn tier_sizes(n: usize) -> [usize; 3] {
    let base = n / 3;
    let rem = n % 3;
    [base + usize::from(rem >= 1), base + usize::from(rem >= 2), base]
}

/// Splits `(id, composite)` pairs into terciles by ascending composite,
/// ties broken by id.
pub fn stratify<'a, I>(scored: I) -> Result<Tiers>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut ranked: Vec<(&str, f64)> = scored.into_iter().collect();
    if ranked.len() < 3 {
        return Err(Error::TooFewProfiles(ranked.len()));
    }
    if ranked.iter().any(|(_, c)| c.is_nan()) {
        return Err(Error::NonFinite("composite difficulty"));
    }
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let [e, m, _] = tier_sizes(ranked.len());
    let mut tiers = Tiers::default();
    for (rank, (id, _)) in ranked.into_iter().enumerate() {
        let tier = if rank < e {
            Tier::Easy
        } else if rank < e + m {
            Tier::Medium
        } else {
            Tier::Hard
        };
        tiers.push(tier, id.into());
    }
    Ok(tiers)
}

/// Proportions of (easy, medium, hard) and size of one stage dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub stage_index: usize,
    pub proportions: [f64; 3],
    pub size: usize,
}

/// Per-stage difficulty mix: easy-heavy, medium-heavy, then hard-heavy.
pub const STAGE_PROPORTIONS: [[f64; 3]; 3] = [[0.5, 0.3, 0.2], [0.3, 0.5, 0.2], [0.2, 0.3, 0.5]];

/// Full-scale stage size.
pub const FULL_STAGE_SIZE: usize = 9600;

impl StageSpec {
    pub fn new(stage_index: usize, proportions: [f64; 3], size: usize) -> Result<Self> {
        let spec = StageSpec {
            stage_index,
            proportions,
            size,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The three default stages at the given size.
    pub fn default_schedule(size: usize) -> Vec<StageSpec> {
        STAGE_PROPORTIONS
            .iter()
            .enumerate()
            .map(|(i, p)| StageSpec {
                stage_index: i + 1,
                proportions: *p,
                size,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidStageSpec("size must be positive".into()));
        }
        if self.stage_index == 0 {
            return Err(Error::InvalidStageSpec("stage index starts at 1".into()));
        }
        if self.proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidStageSpec("proportions must lie in [0, 1]".into()));
        }
        if abs(self.proportions.iter().sum::<f64>() - 1.0) > 1e-9 {
            return Err(Error::InvalidStageSpec("proportions must sum to 1".into()));
        }
        Ok(())
    }

    /// Largest-remainder quotas per tier, summing exactly to `size`.
    /// Equal remainders favour the easier tier.
    pub fn quotas(&self) -> [usize; 3] {
        let exact: [f64; 3] = core::array::from_fn(|i| self.proportions[i] * self.size as f64);
        // snap values within float noise of an integer
        let snapped: [f64; 3] = core::array::from_fn(|i| {
            let r = round(exact[i]);
            if abs(exact[i] - r) < 1e-9 { r } else { exact[i] }
        });
        let mut q: [usize; 3] = core::array::from_fn(|i| floor(snapped[i]) as usize);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let fa = snapped[a] - floor(snapped[a]);
            let fb = snapped[b] - floor(snapped[b]);
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let mut missing = self.size.saturating_sub(q.iter().sum());
        for &i in order.iter().cycle() {
            if missing == 0 {
                break;
            }
            q[i] += 1;
            missing -= 1;
        }
        q
    }
}

/// One sampled stage entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageEntry {
    pub paragraph_id: String,
    pub tier: Tier,
}

/// Samples a stage dataset: quota per tier drawn without replacement within
/// a pass over the tier (reshuffled for each further pass when the tier is
/// smaller than its quota), then concatenated and shuffled.
pub fn build_stage_dataset(tiers: &Tiers, spec: &StageSpec, seed: u64) -> Result<Vec<StageEntry>> {
    spec.validate()?;
    let quotas = spec.quotas();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.size);
    for tier in Tier::ALL {
        let pool = tiers.get(tier);
        let quota = quotas[tier.index()];
        if pool.is_empty() {
            if quota == 0 {
                continue;
            }
            return Err(Error::EmptyTier(tier.name()));
        }
        let mut taken = 0;
        while taken < quota {
            let mut pass: Vec<&String> = pool.iter().collect();
            pass.shuffle(&mut rng);
            for id in pass.into_iter().take(quota - taken) {
                out.push(StageEntry {
                    paragraph_id: id.clone(),
                    tier,
                });
                taken += 1;
            }
        }
    }
    out.shuffle(&mut rng);
    Ok(out)
}

/// Tier counts of a stage dataset.
pub fn tier_counts(entries: &[StageEntry]) -> [usize; 3] {
    let mut c = [0; 3];
    for e in entries {
        c[e.tier.index()] += 1;
    }
    c
}
