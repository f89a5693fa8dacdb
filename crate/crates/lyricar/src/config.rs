//! TOML run configuration.
//!
//! Every section is optional and filled with defaults; unknown keys are
//! rejected. Relative paths resolve against the config file's directory.
//! `LYRICAR_JUDGE_URL`, `LYRICAR_GENERATION_URL` and
//! `LYRICAR_PERPLEXITY_URL` override the corresponding endpoints.

use std::fs;
use std::path::{Path, PathBuf};

use lyricar_core::corpus::{Lang, SimilarityMode, DEFAULT_BOUNDARY};
use lyricar_core::difficulty::{DifficultyWeights, StageSpec, STAGE_PROPORTIONS};
use lyricar_core::grpo::{TrainConfig, DESK_LEARNING_RATES, KL_COEFFICIENTS};
use lyricar_core::rewards::{GatingBand, OutOfBand, RewardConfig, RewardWeights};
use lyricar_core::scheduler::{ScheduleMode, SchedulerParams};
use lyricar_core::trainer::VALIDATION_FRACTION;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus_io::CorpusFormat;
use crate::error::{Error, Result};

pub const JUDGE_URL_ENV: &str = "LYRICAR_JUDGE_URL";
pub const GENERATION_URL_ENV: &str = "LYRICAR_GENERATION_URL";
pub const PERPLEXITY_URL_ENV: &str = "LYRICAR_PERPLEXITY_URL";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub boundary: String,
    /// Global cap on training epochs across all stages.
    pub epoch_budget: usize,
    pub corpus: CorpusConfig,
    pub difficulty: DifficultyConfig,
    pub stages: StagesConfig,
    pub rewards: RewardsConfig,
    pub judge: JudgeConfig,
    pub policy: PolicyConfig,
    pub grpo: GrpoConfig,
    pub scheduler: SchedulerConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            boundary: DEFAULT_BOUNDARY.into(),
            epoch_budget: 300,
            corpus: CorpusConfig::default(),
            difficulty: DifficultyConfig::default(),
            stages: StagesConfig::default(),
            rewards: RewardsConfig::default(),
            judge: JudgeConfig::default(),
            policy: PolicyConfig::default(),
            grpo: GrpoConfig::default(),
            scheduler: SchedulerConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub path: PathBuf,
    pub format: CorpusFormat,
    pub lang: Lang,
    /// Evaluation set; defaults to the training corpus.
    pub test_path: Option<PathBuf>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            path: PathBuf::from("corpus.jsonl"),
            format: CorpusFormat::Jsonl,
            lang: Lang::En,
            test_path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerplexityBackend {
    Ngram,
    Http,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DifficultyConfig {
    pub backend: PerplexityBackend,
    pub ngram_order: usize,
    pub perplexity_url: Option<String>,
    /// Weights for (perplexity, lexical diversity, syntactic depth, rhyme density).
    pub weights: [f64; 4],
}

impl Default for DifficultyConfig {
    fn default() -> Self {
        DifficultyConfig {
            backend: PerplexityBackend::Ngram,
            ngram_order: 3,
            perplexity_url: None,
            weights: DifficultyWeights::default().0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StagesConfig {
    /// Per-stage (easy, medium, hard) proportions; their count fixes the
    /// number of stages.
    pub proportions: Vec<[f64; 3]>,
    pub sizes: Vec<usize>,
    pub validation_fraction: f64,
    /// Prebuilt stage manifest; built from the corpus when absent.
    pub manifest: Option<PathBuf>,
}

impl Default for StagesConfig {
    fn default() -> Self {
        StagesConfig {
            proportions: STAGE_PROPORTIONS.to_vec(),
            sizes: vec![96; 3],
            validation_fraction: VALIDATION_FRACTION,
            manifest: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardsConfig {
    /// (format, rhythm, rhyme, text quality).
    pub weights: [f64; 4],
    pub band: [f64; 2],
    pub length_ratio: f64,
    pub rhyme_mode: SimilarityMode,
    pub out_of_band: OutOfBand,
    pub target_lang: Lang,
}

impl Default for RewardsConfig {
    fn default() -> Self {
        let d = RewardConfig::default();
        RewardsConfig {
            weights: d.weights.as_array(),
            band: [d.band.low, d.band.high],
            length_ratio: d.length_ratio,
            rhyme_mode: d.rhyme_mode,
            out_of_band: d.out_of_band,
            target_lang: d.target_lang,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeBackend {
    Stub,
    Http,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeConfig {
    pub backend: JudgeBackend,
    pub url: Option<String>,
    pub template_id: String,
    /// Prompt template file with `{source}` and `{candidate}` placeholders.
    pub template: Option<PathBuf>,
    pub timeout_secs: f64,
    pub retries: u32,
    pub max_in_flight: usize,
    pub stub_salt: u64,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        JudgeConfig {
            backend: JudgeBackend::Stub,
            url: None,
            template_id: "judge_v1".into(),
            template: None,
            timeout_secs: 30.0,
            retries: 3,
            max_in_flight: 4,
            stub_salt: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyBackend {
    Synthetic,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub backend: PolicyBackend,
    /// Variants per generated pool.
    pub pool_size: usize,
    /// JSONL of `{paragraph_id, variants}`; generated when absent.
    pub pools: Option<PathBuf>,
    pub generation_url: Option<String>,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub retries: u32,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            backend: PolicyBackend::Synthetic,
            pool_size: 6,
            pools: None,
            generation_url: None,
            max_tokens: 256,
            timeout_secs: 60.0,
            retries: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrpoConfig {
    pub group_size: usize,
    pub batch_size: usize,
    pub mini_batch: usize,
    pub micro_batch: usize,
    pub learning_rates: Vec<f64>,
    pub kl_coefficients: Vec<f64>,
}

impl Default for GrpoConfig {
    fn default() -> Self {
        let d = TrainConfig::default();
        GrpoConfig {
            group_size: d.group_size,
            batch_size: d.batch_size,
            mini_batch: d.mini_batch,
            micro_batch: d.micro_batch,
            learning_rates: DESK_LEARNING_RATES.to_vec(),
            kl_coefficients: KL_COEFFICIENTS.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Adaptive,
    Static,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub mode: ModeName,
    pub tau: f64,
    pub patience: usize,
    pub interval: usize,
    /// Epochs per stage in static mode.
    pub epochs_per_stage: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        let p = SchedulerParams::default();
        SchedulerConfig {
            mode: ModeName::Adaptive,
            tau: p.tau,
            patience: p.patience,
            interval: p.interval,
            epochs_per_stage: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Checkpoint cadence in epochs; 0 keeps only the final checkpoint.
    pub checkpoint_every: usize,
    /// Worker threads for evaluation and `score`.
    pub workers: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("runs/default"),
            checkpoint_every: 5,
            workers: 4,
        }
    }
}

impl RunConfig {
    /// Parses TOML without touching the file system.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads, resolves paths, applies env overrides, validates and checks
    /// that referenced files exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.apply_env();
        cfg.validate()?;
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus.path);
        fix(&mut self.output.dir);
        for p in [
            self.corpus.test_path.as_mut(),
            self.stages.manifest.as_mut(),
            self.judge.template.as_mut(),
            self.policy.pools.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn apply_env(&mut self) {
        if let Ok(url) = std::env::var(JUDGE_URL_ENV) {
            self.judge.url = Some(url);
        }
        if let Ok(url) = std::env::var(GENERATION_URL_ENV) {
            self.policy.generation_url = Some(url);
        }
        if let Ok(url) = std::env::var(PERPLEXITY_URL_ENV) {
            self.difficulty.perplexity_url = Some(url);
        }
    }

    pub fn n_stages(&self) -> usize {
        self.stages.proportions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let n = self.n_stages();
        if n == 0 {
            return bad("at least one stage is required".into());
        }
        for (name, len) in [
            ("stages.sizes", self.stages.sizes.len()),
            ("grpo.learning_rates", self.grpo.learning_rates.len()),
            ("grpo.kl_coefficients", self.grpo.kl_coefficients.len()),
        ] {
            if len != n {
                return bad(format!("{name} has {len} entries but there are {n} stages"));
            }
        }
        self.stage_specs()?;
        if !(self.stages.validation_fraction > 0.0 && self.stages.validation_fraction <= 1.0) {
            return bad("stages.validation_fraction must be in (0, 1]".into());
        }
        if self.boundary.trim().is_empty() {
            return bad("boundary must contain a non-whitespace token".into());
        }
        self.reward_config().validate()?;
        DifficultyWeights(self.difficulty.weights).validate()?;
        if !(1..=5).contains(&self.difficulty.ngram_order) {
            return bad("difficulty.ngram_order must be in 1..=5".into());
        }
        self.train_config().validate()?;
        self.scheduler_params().validate()?;
        if self.scheduler.mode == ModeName::Static && self.scheduler.epochs_per_stage == 0 {
            return bad("scheduler.epochs_per_stage must be positive in static mode".into());
        }
        if self.policy.pool_size < 2 {
            return bad("policy.pool_size must be at least 2".into());
        }
        if self.judge.timeout_secs <= 0.0 || self.policy.timeout_secs <= 0.0 {
            return bad("timeouts must be positive".into());
        }
        if self.judge.max_in_flight == 0 || self.output.workers == 0 {
            return bad("judge.max_in_flight and output.workers must be positive".into());
        }
        if self.judge.backend == JudgeBackend::Http && self.judge.url.is_none() {
            return bad(format!("judge.backend = \"http\" needs judge.url or {JUDGE_URL_ENV}"));
        }
        if self.difficulty.backend == PerplexityBackend::Http && self.difficulty.perplexity_url.is_none() {
            return bad(format!("difficulty.backend = \"http\" needs difficulty.perplexity_url or {PERPLEXITY_URL_ENV}"));
        }
        if self.policy.backend == PolicyBackend::External && self.policy.generation_url.is_none() {
            return bad(format!("policy.backend = \"external\" needs policy.generation_url or {GENERATION_URL_ENV}"));
        }
        Ok(())
    }

    fn check_files(&self) -> Result<()> {
        let mut required = vec![&self.corpus.path];
        required.extend(self.corpus.test_path.iter());
        required.extend(self.stages.manifest.iter());
        required.extend(self.judge.template.iter());
        required.extend(self.policy.pools.iter());
        for p in required {
            if !p.is_file() {
                return Err(Error::Config(format!("referenced file does not exist: {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn stage_specs(&self) -> Result<Vec<StageSpec>> {
        self.stages
            .proportions
            .iter()
            .zip(&self.stages.sizes)
            .enumerate()
            .map(|(i, (p, &size))| Ok(StageSpec::new(i + 1, *p, size)?))
            .collect()
    }

    pub fn reward_config(&self) -> RewardConfig {
        let r = &self.rewards;
        RewardConfig {
            weights: RewardWeights::from(r.weights),
            band: GatingBand { low: r.band[0], high: r.band[1] },
            boundary: self.boundary.clone(),
            length_ratio: r.length_ratio,
            rhyme_mode: r.rhyme_mode,
            out_of_band: r.out_of_band,
            target_lang: r.target_lang,
            template_id: self.judge.template_id.clone(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let g = &self.grpo;
        TrainConfig {
            group_size: g.group_size,
            batch_size: g.batch_size,
            mini_batch: g.mini_batch,
            micro_batch: g.micro_batch,
            learning_rates: g.learning_rates.clone(),
            kl_coefficients: g.kl_coefficients.clone(),
        }
    }

    pub fn scheduler_params(&self) -> SchedulerParams {
        SchedulerParams {
            tau: self.scheduler.tau,
            patience: self.scheduler.patience,
            interval: self.scheduler.interval,
        }
    }

    pub fn schedule_mode(&self) -> ScheduleMode {
        match self.scheduler.mode {
            ModeName::Adaptive => ScheduleMode::Adaptive,
            ModeName::Static => ScheduleMode::Static { epochs_per_stage: self.scheduler.epochs_per_stage },
        }
    }

    /// SHA-256 over the canonical JSON form of the settings that affect
    /// training. The output directory and worker count are excluded so a
    /// run can be resumed from a moved directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        c.output.workers = 0;
        c.output.checkpoint_every = 0;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex(&Sha256::digest(&json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
