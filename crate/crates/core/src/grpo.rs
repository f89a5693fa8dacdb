//! Group-relative policy optimization over [`SyntheticPolicy`] pools.
//!
//! For a group of `G` candidates sampled from one pool, the advantage of
//! candidate `k` is its reward minus the group mean (no standard-deviation
//! scaling). The per-group objective is
//!
//! ```text
//! loss = -(1/G) * sum_k log pi(k) * A_k  +  beta * KL(pi || pi_ref)
//! ```
//!
//! with advantages held constant and the KL term computed exactly over the
//! pool's variants. There is no ratio clipping. Pools are independent
//! parameter blocks, so a mini-batch update applies each group's gradient
//! to its own pool.

use alloc::vec::Vec;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::corpus::Paragraph;
use crate::math::{ln, mean};
use crate::policy::{softmax, SyntheticPolicy};
use crate::rewards::CandidateScorer;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
    pub mean_reward: f64,
}

/// `A_k = R_k - mean(R)`.
pub fn group_advantages(rewards: &[f64]) -> Result<GroupResult> {
    if rewards.len() < 2 {
        return Err(Error::GroupTooSmall(rewards.len()));
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("reward"));
    }
    let mean_reward = mean(rewards);
    Ok(GroupResult {
        rewards: rewards.to_vec(),
        advantages: rewards.iter().map(|r| r - mean_reward).collect(),
        mean_reward,
    })
}

/// `-(1/G) * sum_k log_probs[k] * advantages[k]`.
pub fn grpo_loss(log_probs: &[f64], advantages: &[f64]) -> Result<f64> {
    if log_probs.len() != advantages.len() {
        return Err(Error::LengthMismatch {
            left: log_probs.len(),
            right: advantages.len(),
        });
    }
    if log_probs.len() < 2 {
        return Err(Error::GroupTooSmall(log_probs.len()));
    }
    let g = log_probs.len() as f64;
    Ok(-log_probs.iter().zip(advantages).map(|(l, a)| l * a).sum::<f64>() / g)
}

/// Exact categorical `KL(softmax(logits) || softmax(reference))`.
pub fn kl_regularizer(logits: &[f64], reference: &[f64]) -> f64 {
    let p = softmax(logits);
    let lp = crate::policy::log_softmax(logits);
    let lq = crate::policy::log_softmax(reference);
    let kl: f64 = p
        .iter()
        .zip(lp.iter().zip(&lq))
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, (a, b))| pi * (a - b))
        .sum();
    kl.max(0.0)
}

/// Gradient of `KL(softmax(z) || softmax(ref))` with respect to `z`:
/// `p_i * (log p_i - log q_i - KL)`.
pub fn kl_gradient(logits: &[f64], reference: &[f64]) -> Vec<f64> {
    let p = softmax(logits);
    let lp = crate::policy::log_softmax(logits);
    let lq = crate::policy::log_softmax(reference);
    let kl: f64 = p.iter().zip(lp.iter().zip(&lq)).map(|(pi, (a, b))| pi * (a - b)).sum();
    p.iter()
        .zip(lp.iter().zip(&lq))
        .map(|(pi, (a, b))| pi * (a - b - kl))
        .collect()
}

/// Gradient of one group's `grpo_loss + beta * KL` with respect to the pool
/// logits, for sampled variant indices `variants` with `advantages`.
pub fn group_loss_gradient(
    logits: &[f64],
    reference: &[f64],
    variants: &[usize],
    advantages: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    if variants.len() != advantages.len() {
        return Err(Error::LengthMismatch {
            left: variants.len(),
            right: advantages.len(),
        });
    }
    if variants.len() < 2 {
        return Err(Error::GroupTooSmall(variants.len()));
    }
    let p = softmax(logits);
    let g = variants.len() as f64;
    let mut grad = alloc::vec![0.0; logits.len()];
    for (&k, &a) in variants.iter().zip(advantages) {
        if k >= logits.len() {
            return Err(Error::VariantOutOfRange { index: k, len: logits.len() });
        }
        // d/dz of -(1/G) a log p_k = -(a/G) (e_k - p)
        for (j, gj) in grad.iter_mut().enumerate() {
            let e = if j == k { 1.0 } else { 0.0 };
            *gj -= a / g * (e - p[j]);
        }
    }
    if beta != 0.0 {
        for (gj, kj) in grad.iter_mut().zip(kl_gradient(logits, reference)) {
            *gj += beta * kj;
        }
    }
    Ok(grad)
}

/// Learning rate and KL coefficient in force for one stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageHyper {
    pub learning_rate: f64,
    pub kl_coefficient: f64,
}

/// Learning rates of the full-scale schedule (per stage).
pub const FULL_SCALE_LEARNING_RATES: [f64; 3] = [1e-6, 5e-7, 1e-7];
/// Desk-scale learning rates for the logit bandit.
pub const DESK_LEARNING_RATES: [f64; 3] = [0.1, 0.05, 0.01];
/// KL coefficients per stage.
pub const KL_COEFFICIENTS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub group_size: usize,
    pub batch_size: usize,
    pub mini_batch: usize,
    pub micro_batch: usize,
    pub learning_rates: Vec<f64>,
    pub kl_coefficients: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            group_size: crate::policy::DEFAULT_GROUP_SIZE,
            batch_size: 128,
            mini_batch: 64,
            micro_batch: 16,
            learning_rates: DESK_LEARNING_RATES.to_vec(),
            kl_coefficients: KL_COEFFICIENTS.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.group_size < 2 {
            return Err(Error::GroupTooSmall(self.group_size));
        }
        if self.micro_batch == 0 || self.micro_batch > self.mini_batch || self.mini_batch > self.batch_size {
            return bad("batch sizes must satisfy 0 < micro_batch <= mini_batch <= batch_size");
        }
        if self.learning_rates.is_empty() || self.learning_rates.len() != self.kl_coefficients.len() {
            return bad("learning-rate and KL schedules must be non-empty and of equal length");
        }
        if self.learning_rates.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return bad("learning rates must be finite and non-negative");
        }
        if self.kl_coefficients.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return bad("KL coefficients must be finite and non-negative");
        }
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.learning_rates.len()
    }

    /// Hyperparameters of 1-based `stage`; clamps to the last entry.
    pub fn for_stage(&self, stage: usize) -> StageHyper {
        let i = stage.saturating_sub(1).min(self.learning_rates.len() - 1);
        StageHyper {
            learning_rate: self.learning_rates[i],
            kl_coefficient: self.kl_coefficients[i],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub mean_reward: f64,
    pub loss: f64,
    pub kl: f64,
    pub judge_calls: u64,
    pub degraded: u64,
    pub groups: usize,
}

/// One training step over `batch` (one group per entry).
///
/// The batch is cut into mini-batches of `config.mini_batch` groups; each is
/// sampled and scored against the current logits, its gradients accumulated
/// over micro-batch chunks in fixed order, then applied with one
/// gradient-descent update. Loss and KL are reported before the update.
pub fn train_step<S, R>(
    policy: &mut SyntheticPolicy,
    batch: &[&Paragraph],
    scorer: &S,
    config: &TrainConfig,
    hyper: &StageHyper,
    rng: &mut R,
) -> Result<StepMetrics>
where
    S: CandidateScorer + ?Sized,
    R: RngCore + ?Sized,
{
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut rewards_all = Vec::new();
    let mut losses = Vec::new();
    let mut kls = Vec::new();
    let mut judge_calls = 0u64;
    let mut degraded = 0u64;

    for mini in batch.chunks(config.mini_batch) {
        let mut grads: Vec<(usize, Vec<f64>)> = Vec::new();
        for micro in mini.chunks(config.micro_batch) {
            for source in micro {
                let pi = policy.pool_index(&source.id)?;
                let pool = policy.pool_at(pi);
                let group = pool.sample_group(config.group_size, rng)?;
                let mut rewards = Vec::with_capacity(group.len());
                for cand in &group {
                    let scored = scorer.score(source, &cand.text)?;
                    judge_calls += u64::from(scored.judge_called);
                    degraded += u64::from(scored.degraded.is_some());
                    rewards.push(scored.breakdown.total);
                }
                let result = group_advantages(&rewards)?;
                let log_probs: Vec<f64> = group.iter().map(|c| c.log_prob.unwrap_or(0.0)).collect();
                let variants: Vec<usize> = group.iter().map(|c| c.variant.unwrap_or(0)).collect();
                let reference = policy.reference_logits(pi);
                let kl = kl_regularizer(&pool.logits, reference);
                losses.push(grpo_loss(&log_probs, &result.advantages)? + hyper.kl_coefficient * kl);
                kls.push(kl);
                let g = group_loss_gradient(&pool.logits, reference, &variants, &result.advantages, hyper.kl_coefficient)?;
                match grads.iter_mut().find(|(i, _)| *i == pi) {
                    Some((_, acc)) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
                    None => grads.push((pi, g)),
                }
                rewards_all.extend(result.rewards);
            }
        }
        if hyper.learning_rate != 0.0 {
            for (pi, g) in grads {
                let step: Vec<f64> = g.iter().map(|x| hyper.learning_rate * x).collect();
                policy.apply_update(pi, &step)?;
            }
        }
    }

    Ok(StepMetrics {
        mean_reward: mean(&rewards_all),
        loss: mean(&losses),
        kl: mean(&kls),
        judge_calls,
        degraded,
        groups: batch.len(),
    })
}

/// Expected reward `sum_k pi(k) R(k)` of one pool under the current policy,
/// given per-variant rewards.
pub fn expected_reward(logits: &[f64], variant_rewards: &[f64]) -> f64 {
    softmax(logits).iter().zip(variant_rewards).map(|(p, r)| p * r).sum()
}

/// Entropy of the pool distribution in nats.
pub fn entropy(logits: &[f64]) -> f64 {
    softmax(logits)
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * ln(*p))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn advantage_examples() {
        let r = group_advantages(&[0.8, 0.6, 0.4, 0.2]).unwrap();
        for (a, e) in r.advantages.iter().zip([0.3, 0.1, -0.1, -0.3]) {
            assert!((a - e).abs() < 1e-12);
        }
        assert_eq!(group_advantages(&[0.5; 4]).unwrap().advantages, vec![0.0; 4]);
        assert_eq!(group_advantages(&[1.0, -1.0]).unwrap().advantages, vec![1.0, -1.0]);
        assert_eq!(group_advantages(&[1.0]).unwrap_err(), Error::GroupTooSmall(1));
    }

    #[test]
    fn loss_examples() {
        assert_eq!(grpo_loss(&[-1.0, -2.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(grpo_loss(&[-1.0, -1.0], &[0.3, -0.3]).unwrap(), 0.0);
        assert!((grpo_loss(&[-0.5, -2.0], &[0.4, -0.4]).unwrap() - (-0.3)).abs() < 1e-12);
        assert!(grpo_loss(&[-1.0], &[0.3, 0.1]).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_regularizer(&[0.2, 0.7], &[0.2, 0.7]), 0.0);
        // pi = (0.5, 0.5), ref = (0.25, 0.75)
        let reference = [0.0, libm::log(3.0)];
        let expected = 0.5 * libm::log(2.0) + 0.5 * libm::log(2.0 / 3.0);
        assert!((kl_regularizer(&[0.0, 0.0], &reference) - expected).abs() < 1e-12);
        assert!((expected - 0.1438).abs() < 1e-4);
    }

    #[test]
    fn schedule_lookup() {
        let c = TrainConfig::default();
        assert_eq!(c.for_stage(2), StageHyper { learning_rate: 0.05, kl_coefficient: 0.05 });
        assert_eq!(c.for_stage(9).kl_coefficient, 0.1);
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::default();
        c.validate().unwrap();
        c.micro_batch = 100;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.kl_coefficients.pop();
        assert!(c.validate().is_err());
    }
}
