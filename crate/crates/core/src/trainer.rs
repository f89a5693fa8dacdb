//! GRPO training bound to the curriculum driver.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Paragraph;
use crate::grpo::{expected_reward, train_step, StageHyper, TrainConfig};
use crate::math::mean;
use crate::policy::SyntheticPolicy;
use crate::rewards::CandidateScorer;
use crate::scheduler::StageTrainer;
use crate::{Error, Result};

/// Fraction of each stage dataset monitored for convergence.
pub const VALIDATION_FRACTION: f64 = 0.05;

/// Training entries and validation ids of one stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageData {
    /// Paragraph ids in dataset order; repeats allowed.
    pub train: Vec<String>,
    /// Distinct paragraph ids whose expected reward is tracked.
    pub validation: Vec<String>,
}

impl StageData {
    /// Draws a seeded `fraction` of the entries (at least one) as the
    /// validation slice. The enumerated-candidate policy keeps one
    /// parameter block per paragraph, so the slice stays in training:
    /// a pool never trained on would report a constant reward.
    pub fn with_validation_slice(train: Vec<String>, fraction: f64, seed: u64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidConfig("validation fraction must be in (0, 1]".into()));
        }
        let want = (crate::math::ceil(train.len() as f64 * fraction) as usize).max(1);
        let mut order: Vec<&String> = train.iter().collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut validation: Vec<String> = Vec::new();
        for id in order {
            if validation.len() == want {
                break;
            }
            if !validation.contains(id) {
                validation.push(id.clone());
            }
        }
        Ok(StageData { train, validation })
    }
}

/// One line of the metrics log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub stage: usize,
    pub epoch: u64,
    pub mean_reward: f64,
    pub loss: f64,
    pub kl: f64,
    pub judge_calls: u64,
    pub lr: f64,
    pub beta: f64,
}

/// Everything needed to continue training exactly where it stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerState {
    pub policy: SyntheticPolicy,
    pub rng: ChaCha8Rng,
    pub global_step: u64,
    pub epoch: u64,
    pub stage: usize,
    pub hyper: Option<StageHyper>,
}

pub struct GrpoStageTrainer<'a, S: ?Sized> {
    state: TrainerState,
    paragraphs: BTreeMap<String, Paragraph>,
    stages: Vec<StageData>,
    scorer: &'a S,
    config: TrainConfig,
    metrics: Vec<MetricsRecord>,
    variant_rewards: BTreeMap<String, Vec<f64>>,
    validation_judge_calls: u64,
}

impl<'a, S: CandidateScorer + ?Sized> GrpoStageTrainer<'a, S> {
    pub fn new(
        policy: SyntheticPolicy,
        paragraphs: impl IntoIterator<Item = Paragraph>,
        stages: Vec<StageData>,
        scorer: &'a S,
        config: TrainConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if stages.is_empty() {
            return Err(Error::InvalidConfig("at least one stage dataset is required".into()));
        }
        let paragraphs: BTreeMap<String, Paragraph> = paragraphs.into_iter().map(|p| (p.id.clone(), p)).collect();
        for stage in &stages {
            if stage.train.is_empty() || stage.validation.is_empty() {
                return Err(Error::InvalidConfig("every stage needs training and validation entries".into()));
            }
            for id in stage.train.iter().chain(&stage.validation) {
                if !paragraphs.contains_key(id) {
                    return Err(Error::UnknownParagraph(id.clone()));
                }
                policy.pool_index(id)?;
            }
        }
        Ok(GrpoStageTrainer {
            state: TrainerState {
                policy,
                rng: ChaCha8Rng::seed_from_u64(seed),
                global_step: 0,
                epoch: 0,
                stage: 0,
                hyper: None,
            },
            paragraphs,
            stages,
            scorer,
            config,
            metrics: Vec::new(),
            variant_rewards: BTreeMap::new(),
            validation_judge_calls: 0,
        })
    }

    pub fn policy(&self) -> &SyntheticPolicy {
        &self.state.policy
    }

    pub fn state(&self) -> &TrainerState {
        &self.state
    }

    /// Replaces the resumable state, e.g. from a checkpoint.
    pub fn restore(&mut self, mut state: TrainerState) {
        state.policy.reindex();
        self.state = state;
    }

    pub fn into_state(self) -> TrainerState {
        self.state
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn stages(&self) -> &[StageData] {
        &self.stages
    }

    /// Drains metrics gathered since the last call.
    pub fn take_metrics(&mut self) -> Vec<MetricsRecord> {
        core::mem::take(&mut self.metrics)
    }

    /// Judge calls spent scoring validation variants (each scored once).
    pub fn validation_judge_calls(&self) -> u64 {
        self.validation_judge_calls
    }

    fn stage_data(&self, stage: usize) -> Result<&StageData> {
        stage
            .checked_sub(1)
            .and_then(|i| self.stages.get(i))
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("no dataset for stage {stage}")))
    }

    /// Rewards of every variant of a paragraph's pool, scored once.
    pub fn variant_rewards(&mut self, id: &str) -> Result<&[f64]> {
        if !self.variant_rewards.contains_key(id) {
            let source = self.paragraphs.get(id).ok_or_else(|| Error::UnknownParagraph(id.into()))?;
            let pool = self.state.policy.pool(id)?;
            let mut rewards = Vec::with_capacity(pool.len());
            for text in &pool.variants {
                let scored = self.scorer.score(source, text)?;
                self.validation_judge_calls += u64::from(scored.judge_called);
                rewards.push(scored.breakdown.total);
            }
            self.variant_rewards.insert(id.into(), rewards);
        }
        Ok(&self.variant_rewards[id])
    }

    /// Mean expected reward of the policy over `ids`.
    pub fn expected_reward_over(&mut self, ids: &[String]) -> Result<f64> {
        let mut values = Vec::with_capacity(ids.len());
        for id in ids {
            let rewards = self.variant_rewards(id)?.to_vec();
            let pool = self.state.policy.pool(id)?;
            values.push(expected_reward(&pool.logits, &rewards));
        }
        Ok(mean(&values))
    }

    /// Mean reward of the greedy (highest-logit) variant over `ids`.
    pub fn greedy_reward_over(&mut self, ids: &[String]) -> Result<f64> {
        let mut values = Vec::with_capacity(ids.len());
        for id in ids {
            let k = self.state.policy.pool(id)?.greedy();
            values.push(self.variant_rewards(id)?[k]);
        }
        Ok(mean(&values))
    }
}

impl<S: CandidateScorer + ?Sized> StageTrainer for GrpoStageTrainer<'_, S> {
    fn begin_stage(&mut self, stage: usize) -> Result<()> {
        self.stage_data(stage)?;
        self.state.policy.snapshot_reference();
        self.state.stage = stage;
        self.state.hyper = Some(self.config.for_stage(stage));
        Ok(())
    }

    fn train_epoch(&mut self, stage: usize) -> Result<u64> {
        if self.state.stage != stage {
            self.begin_stage(stage)?;
        }
        let hyper = self.state.hyper.unwrap_or_else(|| self.config.for_stage(stage));
        let mut order = self.stage_data(stage)?.train.clone();
        order.shuffle(&mut self.state.rng);
        self.state.epoch += 1;
        let mut steps = 0;
        for chunk in order.chunks(self.config.batch_size) {
            let batch: Vec<&Paragraph> = chunk.iter().map(|id| &self.paragraphs[id]).collect();
            let m = train_step(&mut self.state.policy, &batch, self.scorer, &self.config, &hyper, &mut self.state.rng)?;
            self.state.global_step += 1;
            steps += 1;
            self.metrics.push(MetricsRecord {
                step: self.state.global_step,
                stage,
                epoch: self.state.epoch,
                mean_reward: m.mean_reward,
                loss: m.loss,
                kl: m.kl,
                judge_calls: m.judge_calls,
                lr: hyper.learning_rate,
                beta: hyper.kl_coefficient,
            });
        }
        Ok(steps)
    }

    fn validate(&mut self, stage: usize) -> Result<f64> {
        let ids = self.stage_data(stage)?.validation.clone();
        self.expected_reward_over(&ids)
    }
}
