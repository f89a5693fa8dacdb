//! Policies that produce candidate translations.
//!
//! The trainable policy is a contextual bandit: every source paragraph owns
//! a pool of enumerated candidate texts and one learnable logit per
//! candidate. Selection probabilities are the softmax of the logits.

mod prompt;
mod synth;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::math::{exp, log_sum_exp};
use crate::{Error, Result};

pub use prompt::build_stage_prompt;
pub use synth::PoolGenerator;

/// Default group size.
pub const DEFAULT_GROUP_SIZE: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    /// Natural log of the selection probability; `None` when the backend
    /// does not report it, in which case the candidate cannot be trained on.
    pub log_prob: Option<f64>,
    /// Index into the owning pool, for synthetic candidates.
    pub variant: Option<usize>,
}

impl Candidate {
    pub fn is_trainable(&self) -> bool {
        self.log_prob.is_some_and(f64::is_finite) && self.variant.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub paragraph_id: String,
    pub variants: Vec<String>,
    pub logits: Vec<f64>,
}

impl CandidatePool {
    /// A pool with uniform (zero) logits.
    pub fn new(paragraph_id: impl Into<String>, variants: Vec<String>) -> Result<Self> {
        let n = variants.len();
        Self::with_logits(paragraph_id, variants, alloc::vec![0.0; n])
    }

    pub fn with_logits(paragraph_id: impl Into<String>, variants: Vec<String>, logits: Vec<f64>) -> Result<Self> {
        let paragraph_id = paragraph_id.into();
        if variants.len() < 2 {
            return Err(Error::PoolTooSmall(paragraph_id));
        }
        if logits.len() != variants.len() {
            return Err(Error::LengthMismatch {
                left: variants.len(),
                right: logits.len(),
            });
        }
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("pool logit"));
        }
        Ok(CandidatePool {
            paragraph_id,
            variants,
            logits,
        })
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn log_probabilities(&self) -> Vec<f64> {
        log_softmax(&self.logits)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    pub fn log_prob(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.logits[k] - log_sum_exp(&self.logits))
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.len() {
            Ok(())
        } else {
            Err(Error::VariantOutOfRange {
                index: k,
                len: self.len(),
            })
        }
    }

    /// Gradient of `log softmax(logits)[k]` with respect to the logits:
    /// `1{j = k} - p_j`.
    pub fn grad_log_prob(&self, k: usize) -> Result<Vec<f64>> {
        self.check_index(k)?;
        let mut g: Vec<f64> = self.probabilities().into_iter().map(|p| -p).collect();
        g[k] += 1.0;
        Ok(g)
    }

    /// Draws `g` i.i.d. variants from the softmax distribution.
    pub fn sample_group<R: RngCore + ?Sized>(&self, g: usize, rng: &mut R) -> Result<Vec<Candidate>> {
        if g < 2 {
            return Err(Error::GroupTooSmall(g));
        }
        let probs = self.probabilities();
        let logp = self.log_probabilities();
        Ok((0..g)
            .map(|_| {
                let k = sample_index(&probs, rng.gen::<f64>());
                Candidate {
                    text: self.variants[k].clone(),
                    log_prob: Some(logp[k]),
                    variant: Some(k),
                }
            })
            .collect())
    }

    /// Most probable variant; ties go to the lowest index.
    pub fn greedy(&self) -> usize {
        let mut best = 0;
        for (i, &l) in self.logits.iter().enumerate() {
            if l > self.logits[best] {
                best = i;
            }
        }
        best
    }
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack above the final cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|l| l - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(exp).collect()
}

/// Pools for every paragraph plus the reference logits used by the KL term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPolicy {
    pools: Vec<CandidatePool>,
    reference: Vec<Vec<f64>>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl SyntheticPolicy {
    pub fn new(pools: Vec<CandidatePool>) -> Self {
        let reference = pools.iter().map(|p| p.logits.clone()).collect();
        let mut policy = SyntheticPolicy {
            pools,
            reference,
            index: BTreeMap::new(),
        };
        policy.reindex();
        policy
    }

    /// Rebuilds the id lookup; needed after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .pools
            .iter()
            .enumerate()
            .map(|(i, p)| (p.paragraph_id.clone(), i))
            .collect();
    }

    pub fn pools(&self) -> &[CandidatePool] {
        &self.pools
    }

    pub fn pool_index(&self, paragraph_id: &str) -> Result<usize> {
        self.index
            .get(paragraph_id)
            .copied()
            .ok_or_else(|| Error::UnknownParagraph(paragraph_id.into()))
    }

    pub fn pool(&self, paragraph_id: &str) -> Result<&CandidatePool> {
        Ok(&self.pools[self.pool_index(paragraph_id)?])
    }

    pub fn pool_at(&self, i: usize) -> &CandidatePool {
        &self.pools[i]
    }

    pub fn reference_logits(&self, i: usize) -> &[f64] {
        &self.reference[i]
    }

    /// Freezes the current logits as the KL reference.
    pub fn snapshot_reference(&mut self) {
        self.reference = self.pools.iter().map(|p| p.logits.clone()).collect();
    }

    pub fn sample_group<R: RngCore + ?Sized>(&self, paragraph_id: &str, g: usize, rng: &mut R) -> Result<Vec<Candidate>> {
        self.pool(paragraph_id)?.sample_group(g, rng)
    }

    pub fn grad_log_prob(&self, paragraph_id: &str, k: usize) -> Result<Vec<f64>> {
        self.pool(paragraph_id)?.grad_log_prob(k)
    }

    /// `logits -= step` for pool `i`.
    pub(crate) fn apply_update(&mut self, i: usize, step: &[f64]) -> Result<()> {
        let pool = &mut self.pools[i];
        for (l, s) in pool.logits.iter_mut().zip(step) {
            *l -= s;
        }
        if pool.logits.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("logit after update"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool(logits: Vec<f64>) -> CandidatePool {
        let variants = (0..logits.len()).map(|i| i.to_string()).collect();
        CandidatePool::with_logits("p", variants, logits).unwrap()
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let p = pool(vec![0.0; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 4];
        for c in p.sample_group(100_000, &mut rng).unwrap() {
            counts[c.variant.unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 100_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn saturated_logit_dominates() {
        let p = pool(vec![20.0, 0.0, 0.0]);
        assert!(p.probabilities()[0] > 0.999);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hits = p.sample_group(10_000, &mut rng).unwrap().iter().filter(|c| c.variant == Some(0)).count();
        assert!(hits as f64 / 10_000.0 > 0.999);
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = pool(vec![0.3, -0.2, 1.0]);
        let a = p.sample_group(50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = p.sample_group(50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn group_of_one_rejected() {
        let p = pool(vec![0.0, 0.0]);
        assert_eq!(p.sample_group(1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err(), Error::GroupTooSmall(1));
    }

    #[test]
    fn softmax_gradient_identity() {
        let p = pool(vec![0.0, 0.0]);
        assert_eq!(p.grad_log_prob(0).unwrap(), vec![0.5, -0.5]);
        let q = pool(vec![0.4, -1.2, 2.0, 0.1]);
        for k in 0..4 {
            assert!(q.grad_log_prob(k).unwrap().iter().sum::<f64>().abs() < 1e-12);
        }
        assert!(q.grad_log_prob(4).is_err());
    }

    #[test]
    fn greedy_prefers_first_on_ties() {
        assert_eq!(pool(vec![0.0, 0.0]).greedy(), 0);
        assert_eq!(pool(vec![0.0, 1.0, 1.0]).greedy(), 1);
    }

    #[test]
    fn pools_need_two_variants() {
        assert!(CandidatePool::new("p", vec!["only".into()]).is_err());
    }
}
