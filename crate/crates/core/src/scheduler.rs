//! Reward-convergence-guided curriculum adaptation.
//!
//! Training proceeds through stages `1..=N`. Every `interval` epochs the
//! validation mean reward is pushed into a sliding window of capacity
//! `patience`; once the window is full and its population variance drops
//! below `tau`, the curriculum moves to the next stage and the window is
//! cleared. Convergence of the last stage ends the run.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::population_variance;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulerParams {
    /// Variance threshold.
    pub tau: f64,
    /// Minimum window fill, also the window capacity.
    pub patience: usize,
    /// Validation cadence in epochs.
    pub interval: usize,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        SchedulerParams {
            tau: 1e-4,
            patience: 5,
            interval: 1,
        }
    }
}

impl SchedulerParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::InvalidConfig("tau must be non-negative".into()));
        }
        if self.patience == 0 || self.interval == 0 {
            return Err(Error::InvalidConfig("patience and interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Advance {
    /// Moved to this (1-based) stage.
    Advanced(usize),
    /// The final stage is done.
    Terminal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    pub stage: usize,
    pub n_stages: usize,
    pub window: VecDeque<f64>,
    pub epochs_in_stage: usize,
    pub params: SchedulerParams,
}

impl CurriculumState {
    pub fn new(n_stages: usize, params: SchedulerParams) -> Result<Self> {
        params.validate()?;
        if n_stages == 0 {
            return Err(Error::InvalidConfig("at least one stage is required".into()));
        }
        Ok(CurriculumState {
            stage: 1,
            n_stages,
            window: VecDeque::with_capacity(params.patience),
            epochs_in_stage: 0,
            params,
        })
    }

    /// Pushes a validation reward, evicting the oldest beyond capacity.
    pub fn record_validation(&mut self, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::NonFinite("validation reward"));
        }
        self.window.push_back(reward);
        while self.window.len() > self.params.patience {
            self.window.pop_front();
        }
        Ok(())
    }

    pub fn window_variance(&self) -> f64 {
        let w: Vec<f64> = self.window.iter().copied().collect();
        population_variance(&w)
    }

    /// `|W| >= k` and `Var(W) < tau`.
    pub fn should_advance(&self) -> bool {
        self.window.len() >= self.params.patience && self.window_variance() < self.params.tau
    }

    pub fn advance(&mut self) -> Advance {
        if self.stage >= self.n_stages {
            return Advance::Terminal;
        }
        self.stage += 1;
        self.window.clear();
        self.epochs_in_stage = 0;
        Advance::Advanced(self.stage)
    }

    /// Whether the epoch just finished falls on the validation cadence.
    pub fn is_validation_epoch(&self) -> bool {
        self.epochs_in_stage > 0 && self.epochs_in_stage.is_multiple_of(self.params.interval)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Global epoch count (1-based) at which validation ran.
    pub epoch: usize,
    pub stage: usize,
    pub epoch_in_stage: usize,
    pub mean_reward: f64,
    pub window_variance: f64,
    pub window_len: usize,
    /// The stage index increased after this event.
    pub advanced: bool,
    /// The adaptive criterion fired (also true on the terminal convergence).
    pub converged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurriculumTrace {
    pub events: Vec<TraceEvent>,
}

impl CurriculumTrace {
    pub fn advancement_epochs(&self) -> Vec<usize> {
        self.events.iter().filter(|e| e.advanced).map(|e| e.epoch).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ScheduleMode {
    /// Advance when the reward window converges.
    Adaptive,
    /// Advance after a fixed number of epochs per stage.
    Static { epochs_per_stage: usize },
}

/// What the driver needs from a trainer.
pub trait StageTrainer {
    /// Called once when `stage` (1-based) becomes active, before its first
    /// epoch. Stage hyperparameters and data switch here.
    fn begin_stage(&mut self, stage: usize) -> Result<()>;
    /// Trains one epoch on the active stage; returns steps taken.
    fn train_epoch(&mut self, stage: usize) -> Result<u64>;
    /// Mean validation reward on the active stage.
    fn validate(&mut self, stage: usize) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    /// All stages completed.
    Completed,
    /// Epoch budget exhausted first.
    Truncated,
}

/// Resumable driver; serializing it between epochs captures the whole
/// scheduling state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurriculumDriver {
    pub state: CurriculumState,
    pub mode: ScheduleMode,
    pub epoch_budget: usize,
    pub epochs: usize,
    pub steps: u64,
    pub stage_started: bool,
    pub status: RunStatus,
    pub trace: CurriculumTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochOutcome {
    pub steps: u64,
    pub event: Option<TraceEvent>,
}

impl CurriculumDriver {
    pub fn new(n_stages: usize, params: SchedulerParams, mode: ScheduleMode, epoch_budget: usize) -> Result<Self> {
        if let ScheduleMode::Static { epochs_per_stage: 0 } = mode {
            return Err(Error::InvalidConfig("static schedule needs at least one epoch per stage".into()));
        }
        Ok(CurriculumDriver {
            state: CurriculumState::new(n_stages, params)?,
            mode,
            epoch_budget,
            epochs: 0,
            steps: 0,
            stage_started: false,
            status: RunStatus::Running,
            trace: CurriculumTrace::default(),
        })
    }

    pub fn is_done(&self) -> bool {
        self.status != RunStatus::Running
    }

    /// Runs one epoch (plus validation and stage bookkeeping when due).
    pub fn run_epoch<T: StageTrainer + ?Sized>(&mut self, trainer: &mut T) -> Result<EpochOutcome> {
        if self.is_done() {
            return Ok(EpochOutcome { steps: 0, event: None });
        }
        if self.epochs >= self.epoch_budget {
            self.status = RunStatus::Truncated;
            return Ok(EpochOutcome { steps: 0, event: None });
        }
        let stage = self.state.stage;
        if !self.stage_started {
            trainer.begin_stage(stage)?;
            self.stage_started = true;
        }
        let steps = trainer.train_epoch(stage)?;
        self.steps += steps;
        self.epochs += 1;
        self.state.epochs_in_stage += 1;

        let mut event = None;
        if self.state.is_validation_epoch() {
            let reward = trainer.validate(stage)?;
            self.state.record_validation(reward)?;
            let variance = self.state.window_variance();
            let converged = matches!(self.mode, ScheduleMode::Adaptive) && self.state.should_advance();
            let scheduled = match self.mode {
                ScheduleMode::Adaptive => converged,
                ScheduleMode::Static { epochs_per_stage } => self.state.epochs_in_stage >= epochs_per_stage,
            };
            let mut ev = TraceEvent {
                epoch: self.epochs,
                stage,
                epoch_in_stage: self.state.epochs_in_stage,
                mean_reward: reward,
                window_variance: variance,
                window_len: self.state.window.len(),
                advanced: false,
                converged,
            };
            if scheduled {
                self.finish_stage(&mut ev);
            }
            self.trace.events.push(ev.clone());
            event = Some(ev);
        } else if let ScheduleMode::Static { epochs_per_stage } = self.mode {
            // static stages end on schedule even between validations
            if self.state.epochs_in_stage >= epochs_per_stage {
                let mut ev = TraceEvent {
                    epoch: self.epochs,
                    stage,
                    epoch_in_stage: self.state.epochs_in_stage,
                    mean_reward: f64::NAN,
                    window_variance: self.state.window_variance(),
                    window_len: self.state.window.len(),
                    advanced: false,
                    converged: false,
                };
                self.finish_stage(&mut ev);
            }
        }
        if !self.is_done() && self.epochs >= self.epoch_budget {
            self.status = RunStatus::Truncated;
        }
        Ok(EpochOutcome { steps, event })
    }

    fn finish_stage(&mut self, ev: &mut TraceEvent) {
        match self.state.advance() {
            Advance::Advanced(_) => {
                ev.advanced = true;
                self.stage_started = false;
            }
            Advance::Terminal => self.status = RunStatus::Completed,
        }
    }

    pub fn run<T: StageTrainer + ?Sized>(&mut self, trainer: &mut T) -> Result<()> {
        while !self.is_done() {
            self.run_epoch(trainer)?;
        }
        Ok(())
    }
}

/// Summary of a finished curriculum run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurriculumRun {
    pub trace: CurriculumTrace,
    pub status: RunStatus,
    pub epochs: usize,
    pub steps: u64,
    pub final_stage: usize,
}

impl CurriculumRun {
    pub fn truncated(&self) -> bool {
        self.status == RunStatus::Truncated
    }
}

/// Drives `trainer` through `n_stages` until completion or budget.
pub fn run_curriculum<T: StageTrainer + ?Sized>(
    trainer: &mut T,
    n_stages: usize,
    params: SchedulerParams,
    mode: ScheduleMode,
    epoch_budget: usize,
) -> Result<CurriculumRun> {
    let mut driver = CurriculumDriver::new(n_stages, params, mode, epoch_budget)?;
    driver.run(trainer)?;
    Ok(CurriculumRun {
        final_stage: driver.state.stage,
        trace: driver.trace,
        status: driver.status,
        epochs: driver.epochs,
        steps: driver.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(k: usize, tau: f64) -> CurriculumState {
        CurriculumState::new(3, SchedulerParams { tau, patience: k, interval: 1 }).unwrap()
    }

    #[test]
    fn window_appends_and_evicts() {
        let mut s = state(3, 1e-4);
        s.record_validation(0.5).unwrap();
        assert_eq!(s.window, [0.5]);
        for r in [0.1, 0.2, 0.3, 0.4] {
            s.record_validation(r).unwrap();
        }
        assert_eq!(s.window, [0.2, 0.3, 0.4]);
        assert!(s.record_validation(f64::NAN).is_err());
        assert!(s.record_validation(f64::INFINITY).is_err());
    }

    #[test]
    fn advance_criterion() {
        let mut s = state(5, 1e-4);
        for r in [0.600, 0.601, 0.599, 0.600, 0.6005] {
            s.record_validation(r).unwrap();
        }
        assert!(s.should_advance());

        let mut s = state(5, 1e-4);
        for r in [0.600, 0.601, 0.599] {
            s.record_validation(r).unwrap();
        }
        assert!(!s.should_advance());

        let mut s = state(5, 1e-4);
        for r in [0.3, 0.5, 0.4, 0.6, 0.35] {
            s.record_validation(r).unwrap();
        }
        assert!(!s.should_advance());
    }

    #[test]
    fn advance_resets_window() {
        let mut s = state(2, 1.0);
        s.record_validation(0.1).unwrap();
        s.epochs_in_stage = 4;
        assert_eq!(s.advance(), Advance::Advanced(2));
        assert!(s.window.is_empty());
        assert_eq!(s.epochs_in_stage, 0);
        assert_eq!(s.advance(), Advance::Advanced(3));
        assert_eq!(s.advance(), Advance::Terminal);
        assert_eq!(s.stage, 3);
    }

    #[test]
    fn params_validated() {
        assert!(CurriculumState::new(3, SchedulerParams { tau: -1.0, ..Default::default() }).is_err());
        assert!(CurriculumState::new(3, SchedulerParams { patience: 0, ..Default::default() }).is_err());
        assert!(CurriculumState::new(0, SchedulerParams::default()).is_err());
    }
}
