//! End-to-end pipeline: ingest, stratify, build stages, train, evaluate, score.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use lyricar_core::bleu::{bleu, tokenize_zh, BleuScore, DEFAULT_MAX_N, SMOOTHING_NOTE};
use lyricar_core::corpus::{Lang, Paragraph};
use lyricar_core::difficulty::{
    build_stage_dataset, profile_corpus, train_fallback_lm, DifficultyProfile, DifficultyWeights, PerplexityScorer,
    Tiers,
};
use lyricar_core::grpo::expected_reward;
use lyricar_core::policy::{build_stage_prompt, CandidatePool, SyntheticPolicy};
use lyricar_core::rewards::{
    CandidateScorer, JudgeClient, JudgeError, RewardBreakdown, RewardConfig, RewardEngine, ScoredCandidate, StubJudge,
    Verdict,
};
use lyricar_core::scheduler::{CurriculumDriver, RunStatus};
use lyricar_core::trainer::{GrpoStageTrainer, MetricsRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkpoint::{Checkpoint, CHECKPOINT_VERSION};
use crate::config::{hex, JudgeBackend, PerplexityBackend, PolicyBackend, RunConfig};
use crate::corpus_io::{read_corpus, ParsedCorpus};
use crate::error::{Error, Result};
use crate::http::{ExternalPolicy, HttpJudge, HttpPerplexity, DEFAULT_JUDGE_TEMPLATE};
use crate::jsonl::{read_jsonl, write_atomic, write_jsonl, JsonlLog};
use crate::manifest::{group_by_stage, manifest_entries, read_manifest, stage_data, write_manifest, ManifestEntry};
use crate::pools::{generate_pools, read_pools};

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const STAGES_FILE: &str = "stages.jsonl";
pub const PROFILES_FILE: &str = "profiles.jsonl";
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";
pub const LATEST_CHECKPOINT: &str = "checkpoints/latest.json";
pub const REPORT_FILE: &str = "report.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const COMET_NOTICE: &str = "COMET: not supported";

/// Content hash in the style of a git blob id, over SHA-256.
pub fn data_version(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(&bytes);
    Ok(hex(&h.finalize()))
}

pub fn load_corpus(cfg: &RunConfig) -> Result<ParsedCorpus> {
    let parsed = read_corpus(&cfg.corpus.path, cfg.corpus.format, cfg.corpus.lang, &cfg.boundary)?;
    if parsed.dropped > 0 {
        log::warn!("{}: dropped {} empty paragraphs", cfg.corpus.path.display(), parsed.dropped);
    }
    if parsed.paragraphs.is_empty() {
        return Err(Error::Core(lyricar_core::Error::EmptyCorpus));
    }
    Ok(parsed)
}

fn perplexity_scorer(cfg: &RunConfig, paragraphs: &[Paragraph]) -> Result<Box<dyn PerplexityScorer>> {
    Ok(match cfg.difficulty.backend {
        PerplexityBackend::Ngram => Box::new(train_fallback_lm(paragraphs, cfg.difficulty.ngram_order)?),
        PerplexityBackend::Http => Box::new(HttpPerplexity::new(
            cfg.difficulty.perplexity_url.clone().unwrap_or_default(),
            Duration::from_secs_f64(cfg.judge.timeout_secs),
            cfg.judge.retries,
        )),
    })
}

/// Scores difficulty for every paragraph and assigns tiers.
pub fn stratify(cfg: &RunConfig, paragraphs: &[Paragraph]) -> Result<(Vec<DifficultyProfile>, Tiers)> {
    let scorer = perplexity_scorer(cfg, paragraphs)?;
    Ok(profile_corpus(paragraphs, scorer.as_ref(), &DifficultyWeights(cfg.difficulty.weights))?)
}

/// Rebuilds tiers from saved profiles (ascending composite within a tier).
pub fn tiers_from_profiles(profiles: &[DifficultyProfile]) -> Tiers {
    let mut sorted: Vec<&DifficultyProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.composite.total_cmp(&b.composite).then_with(|| a.paragraph_id.cmp(&b.paragraph_id)));
    let mut tiers = Tiers::default();
    for p in sorted {
        tiers.push(p.tier, p.paragraph_id.clone());
    }
    tiers
}

/// Samples every stage dataset from `tiers`.
pub fn build_stages(cfg: &RunConfig, tiers: &Tiers) -> Result<Vec<Vec<ManifestEntry>>> {
    let mut stages = Vec::new();
    for spec in cfg.stage_specs()? {
        let seed = lyricar_core::stable_hash(&[b"stage", &cfg.seed.to_le_bytes(), &(spec.stage_index as u64).to_le_bytes()]);
        stages.push(build_stage_dataset(tiers, &spec, seed)?);
    }
    group_by_stage(manifest_entries(&stages), cfg.n_stages())
}

pub fn cmd_stratify(cfg: &RunConfig, output: &Path) -> Result<Vec<DifficultyProfile>> {
    let corpus = load_corpus(cfg)?;
    let (profiles, tiers) = stratify(cfg, &corpus.paragraphs)?;
    write_jsonl(output, &profiles)?;
    log::info!("tiers easy/medium/hard = {:?}", tiers.sizes());
    Ok(profiles)
}

pub fn cmd_build_stages(cfg: &RunConfig, profiles: Option<&Path>, output: &Path) -> Result<Vec<Vec<ManifestEntry>>> {
    let tiers = match profiles {
        Some(path) => tiers_from_profiles(&read_jsonl(path)?),
        None => stratify(cfg, &load_corpus(cfg)?.paragraphs)?.1,
    };
    let stages = build_stages(cfg, &tiers)?;
    write_manifest(output, &stages.concat())?;
    Ok(stages)
}

/// Judge backend selected by the config.
pub enum Judge {
    Stub(StubJudge),
    Http(HttpJudge),
}

impl JudgeClient for Judge {
    fn judge(&self, source: &Paragraph, candidate: &str, template_id: &str) -> std::result::Result<Verdict, JudgeError> {
        match self {
            Judge::Stub(j) => j.judge(source, candidate, template_id),
            Judge::Http(j) => j.judge(source, candidate, template_id),
        }
    }
}

pub fn make_judge(cfg: &RunConfig) -> Result<Judge> {
    let j = &cfg.judge;
    Ok(match j.backend {
        JudgeBackend::Stub => Judge::Stub(StubJudge::new(j.stub_salt)),
        JudgeBackend::Http => {
            let template = match &j.template {
                Some(path) => fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
                None => DEFAULT_JUDGE_TEMPLATE.to_string(),
            };
            Judge::Http(HttpJudge::new(
                j.url.clone().unwrap_or_default(),
                Duration::from_secs_f64(j.timeout_secs),
                j.retries,
                j.max_in_flight,
                template,
                &cfg.boundary,
            ))
        }
    })
}

/// Scores `(source, candidate)` pairs on up to `workers` threads; results
/// come back in input order.
pub fn score_all<J: JudgeClient + Sync>(
    config: &RewardConfig,
    judge: &J,
    items: &[(&Paragraph, String)],
    workers: usize,
) -> Result<Vec<ScoredCandidate>> {
    let engine = RewardEngine::new(config.clone(), judge)?;
    if workers <= 1 || items.len() < 2 {
        return items.iter().map(|(p, c)| Ok(engine.score(p, c)?)).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let results: Vec<Result<Vec<ScoredCandidate>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let config = config.clone();
                s.spawn(move || {
                    let engine = RewardEngine::new(config, judge)?;
                    part.iter().map(|(p, c)| Ok(engine.score(p, c)?)).collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scoring thread panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn load_stage_manifest(cfg: &RunConfig, paragraphs: &[Paragraph]) -> Result<Vec<Vec<ManifestEntry>>> {
    match &cfg.stages.manifest {
        Some(path) => read_manifest(path, cfg.n_stages()),
        None => build_stages(cfg, &stratify(cfg, paragraphs)?.1),
    }
}

fn load_pools(cfg: &RunConfig, paragraphs: &[Paragraph]) -> Result<Vec<CandidatePool>> {
    match &cfg.policy.pools {
        Some(path) => read_pools(path, paragraphs),
        None => generate_pools(paragraphs, cfg.policy.pool_size, &cfg.boundary, cfg.seed),
    }
}

#[derive(Clone, Debug, Default)]
pub struct TrainOptions {
    /// Checkpoint to continue from.
    pub resume: Option<PathBuf>,
    /// Build everything, train nothing, write nothing.
    pub dry_run: bool,
    /// Stop after this many epochs in this invocation (the run stays
    /// resumable).
    pub max_epochs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub data_versions: BTreeMap<String, String>,
    pub status: RunStatus,
    pub epochs: usize,
    pub steps: u64,
    pub final_stage: usize,
    pub advancement_epochs: Vec<usize>,
    /// Policy-expected reward over all training paragraphs before and after.
    pub initial_reward: f64,
    pub final_reward: f64,
    pub train_judge_calls: u64,
    pub tier_counts: Vec<BTreeMap<String, usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub status: RunStatus,
    pub epochs: usize,
    pub steps: u64,
    pub final_stage: usize,
    pub initial_reward: f64,
    /// `None` for dry runs.
    pub final_reward: Option<f64>,
    pub checkpoint: Option<PathBuf>,
}

fn training_ids(stages: &[Vec<ManifestEntry>]) -> Vec<String> {
    let mut ids: Vec<String> = stages.iter().flatten().map(|e| e.paragraph_id.clone()).collect();
    ids.sort();
    ids.dedup();
    ids
}

/// Keeps only the log lines a checkpoint has already accounted for.
fn truncate_log<T, F>(path: &Path, keep: F) -> Result<()>
where
    T: Serialize + for<'de> Deserialize<'de>,
    F: Fn(&T) -> bool,
{
    if !path.exists() {
        return Ok(());
    }
    let kept: Vec<T> = read_jsonl::<T>(path)?.into_iter().filter(|x| keep(x)).collect();
    write_jsonl(path, &kept)
}

pub fn cmd_train(cfg: &RunConfig, opts: &TrainOptions) -> Result<TrainSummary> {
    if cfg.policy.backend == PolicyBackend::External {
        return Err(Error::Config(
            "policy.backend = \"external\" cannot be trained: the generation endpoint exposes no parameters; \
             use it with `evaluate` or `score`"
                .into(),
        ));
    }
    let corpus = load_corpus(cfg)?;
    let stages = load_stage_manifest(cfg, &corpus.paragraphs)?;
    let pools = load_pools(cfg, &corpus.paragraphs)?;
    let judge = make_judge(cfg)?;
    let engine = RewardEngine::new(cfg.reward_config(), &judge)?;
    let data = stage_data(&stages, cfg.stages.validation_fraction, cfg.seed)?;
    let mut trainer = GrpoStageTrainer::new(
        SyntheticPolicy::new(pools),
        corpus.paragraphs.iter().cloned(),
        data,
        &engine,
        cfg.train_config(),
        cfg.seed,
    )?;
    let mut driver =
        CurriculumDriver::new(cfg.n_stages(), cfg.scheduler_params(), cfg.schedule_mode(), cfg.epoch_budget)?;
    let config_hash = cfg.hash();
    let ids = training_ids(&stages);
    let out = &cfg.output.dir;
    let metrics_path = out.join(METRICS_FILE);
    let trace_path = out.join(TRACE_FILE);

    let mut initial_reward = None;
    if let Some(path) = &opts.resume {
        let ck = Checkpoint::load(path)?;
        ck.check_config(&config_hash)?;
        initial_reward = ck.initial_reward;
        trainer.restore(ck.trainer);
        driver = ck.driver;
    }
    let initial_reward = match initial_reward {
        Some(r) => r,
        None => trainer.expected_reward_over(&ids)?,
    };

    if opts.dry_run {
        log::info!(
            "dry run: {} paragraphs, {} stages, {} training ids; 0 steps",
            corpus.paragraphs.len(),
            stages.len(),
            ids.len()
        );
        return Ok(TrainSummary {
            status: driver.status,
            epochs: driver.epochs,
            steps: 0,
            final_stage: driver.state.stage,
            initial_reward,
            final_reward: None,
            checkpoint: None,
        });
    }

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    if cfg.stages.manifest.is_none() {
        write_manifest(&out.join(STAGES_FILE), &stages.concat())?;
    }
    let (mut metrics_log, mut trace_log) = if opts.resume.is_some() {
        let step = trainer.state().global_step;
        let epochs = driver.epochs;
        truncate_log::<MetricsRecord, _>(&metrics_path, |m| m.step <= step)?;
        truncate_log::<lyricar_core::scheduler::TraceEvent, _>(&trace_path, |e| e.epoch <= epochs)?;
        (JsonlLog::append_to(&metrics_path)?, JsonlLog::append_to(&trace_path)?)
    } else {
        (JsonlLog::create(&metrics_path)?, JsonlLog::create(&trace_path)?)
    };

    let snapshot = |driver: &CurriculumDriver, trainer: &GrpoStageTrainer<'_, RewardEngine<'_>>| Checkpoint {
        version: CHECKPOINT_VERSION,
        config_hash: config_hash.clone(),
        initial_reward: Some(initial_reward),
        driver: driver.clone(),
        trainer: trainer.state().clone(),
    };
    let latest = out.join(LATEST_CHECKPOINT);
    let mut ran = 0;
    while !driver.is_done() && opts.max_epochs.is_none_or(|m| ran < m) {
        let outcome = driver.run_epoch(&mut trainer)?;
        ran += 1;
        metrics_log.append(&trainer.take_metrics())?;
        if let Some(ev) = &outcome.event {
            trace_log.append(std::slice::from_ref(ev))?;
            log::info!(
                "epoch {} stage {} validation {:.6} var {:.3e}{}",
                ev.epoch,
                ev.stage,
                ev.mean_reward,
                ev.window_variance,
                if ev.advanced { " -> advance" } else { "" }
            );
        }
        let every = cfg.output.checkpoint_every;
        if every > 0 && driver.epochs.is_multiple_of(every) {
            let ck = snapshot(&driver, &trainer);
            ck.save(&out.join(format!("checkpoints/epoch-{:04}.json", driver.epochs)))?;
            ck.save(&latest)?;
        }
    }
    snapshot(&driver, &trainer).save(&latest)?;
    let final_reward = trainer.expected_reward_over(&ids)?;

    if driver.is_done() {
        let mut data_versions = BTreeMap::new();
        data_versions.insert("corpus".to_string(), data_version(&cfg.corpus.path)?);
        let stages_path = cfg.stages.manifest.clone().unwrap_or_else(|| out.join(STAGES_FILE));
        data_versions.insert("stages".to_string(), data_version(&stages_path)?);
        if let Some(p) = &cfg.policy.pools {
            data_versions.insert("pools".to_string(), data_version(p)?);
        }
        let train_judge_calls = read_jsonl::<MetricsRecord>(&metrics_path)?.iter().map(|m| m.judge_calls).sum();
        let manifest = RunManifest {
            config_hash: config_hash.clone(),
            data_versions,
            status: driver.status,
            epochs: driver.epochs,
            steps: driver.steps,
            final_stage: driver.state.stage,
            advancement_epochs: driver.trace.advancement_epochs(),
            initial_reward,
            final_reward,
            train_judge_calls,
            tier_counts: crate::manifest::tier_table(&stages),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(&out.join(RUN_MANIFEST_FILE), &bytes)?;
    }
    Ok(TrainSummary {
        status: driver.status,
        epochs: driver.epochs,
        steps: driver.steps,
        final_stage: driver.state.stage,
        initial_reward,
        final_reward: Some(final_reward),
        checkpoint: Some(latest),
    })
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Trained state to evaluate; the untrained policy when absent.
    pub checkpoint: Option<PathBuf>,
    /// Overrides `corpus.test_path`.
    pub test_path: Option<PathBuf>,
    /// Report directory; defaults to the run's output directory.
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeans {
    pub fmt: f64,
    pub rtm: f64,
    pub rym: f64,
    pub txtq: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    pub smoothing: String,
    pub tokenization: String,
    pub pairs: usize,
    #[serde(flatten)]
    pub score: BleuScore,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub policy: String,
    pub paragraphs: usize,
    /// Test paragraphs without a trained pool (scored with a fresh one).
    pub unseen: usize,
    /// Component means of the greedy decode.
    pub means: ComponentMeans,
    /// Policy-expected total reward, for the synthetic policy.
    pub expected_total: Option<f64>,
    pub judge_calls: u64,
    pub degraded: u64,
    pub bleu: Option<BleuReport>,
    pub comet: String,
    pub notices: Vec<String>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn component_means(scored: &[ScoredCandidate]) -> ComponentMeans {
    let b = || scored.iter().map(|s| &s.breakdown);
    ComponentMeans {
        fmt: mean_of(b().map(|x| x.fmt)),
        rtm: mean_of(b().map(|x| x.rtm)),
        rym: mean_of(b().map(|x| x.rym)),
        txtq: mean_of(b().map(|x| f64::from(x.txtq))),
        total: mean_of(b().map(|x| x.total)),
    }
}

fn strip_boundary(text: &str, boundary: &str) -> String {
    let token = boundary.trim();
    if token.is_empty() {
        text.to_string()
    } else {
        text.replace(token, " ")
    }
}

pub fn cmd_evaluate(cfg: &RunConfig, opts: &EvalOptions) -> Result<EvalReport> {
    let test_path = opts.test_path.clone().or_else(|| cfg.corpus.test_path.clone()).unwrap_or_else(|| cfg.corpus.path.clone());
    let test = read_corpus(&test_path, cfg.corpus.format, cfg.corpus.lang, &cfg.boundary)?;
    if test.paragraphs.is_empty() {
        return Err(Error::Config(format!("test set {} is empty", test_path.display())));
    }
    let judge = make_judge(cfg)?;
    let reward_config = cfg.reward_config();
    let mut notices = Vec::new();
    let mut unseen = 0;
    let mut expected = Vec::new();
    let (policy_name, candidates, pool_rewards): (String, Vec<String>, Vec<Option<CandidatePool>>) =
        match cfg.policy.backend {
            PolicyBackend::Synthetic => {
                let policy = match &opts.checkpoint {
                    Some(path) => {
                        let ck = Checkpoint::load(path)?;
                        let mut p = ck.trainer.policy;
                        p.reindex();
                        Some(p)
                    }
                    None => None,
                };
                let mut pools = Vec::with_capacity(test.paragraphs.len());
                let mut fresh_needed = Vec::new();
                for p in &test.paragraphs {
                    match policy.as_ref().map(|pol| pol.pool(&p.id)) {
                        Some(Ok(pool)) => pools.push(Some(pool.clone())),
                        _ => {
                            pools.push(None);
                            fresh_needed.push(p.clone());
                        }
                    }
                }
                if policy.is_some() {
                    unseen = fresh_needed.len();
                }
                let mut fresh = generate_pools(&fresh_needed, cfg.policy.pool_size, &cfg.boundary, cfg.seed)?.into_iter();
                let pools: Vec<CandidatePool> =
                    pools.into_iter().map(|p| p.unwrap_or_else(|| fresh.next().expect("one fresh pool per gap"))).collect();
                let texts = pools.iter().map(|p| p.variants[p.greedy()].clone()).collect();
                let name = if opts.checkpoint.is_some() { "checkpoint" } else { "untrained" };
                (name.into(), texts, pools.into_iter().map(Some).collect())
            }
            PolicyBackend::External => {
                let client = ExternalPolicy::new(
                    cfg.policy.generation_url.clone().unwrap_or_default(),
                    Duration::from_secs_f64(cfg.policy.timeout_secs),
                    cfg.policy.retries,
                    cfg.policy.max_tokens,
                );
                let mut texts = Vec::with_capacity(test.paragraphs.len());
                for p in &test.paragraphs {
                    let prompt = build_stage_prompt(p, cfg.n_stages().min(3), &cfg.boundary)?;
                    let text = client.generate(&prompt, 1, Some(cfg.seed))?.into_iter().next().map(|c| c.text);
                    if text.is_none() {
                        notices.push(format!("{}: empty generation scored as empty text", p.id));
                    }
                    texts.push(text.unwrap_or_default());
                }
                ("external".into(), texts, vec![None; test.paragraphs.len()])
            }
        };
    if unseen > 0 {
        notices.push(format!("{unseen} test paragraphs have no trained pool; scored with fresh uniform pools"));
    }

    let items: Vec<(&Paragraph, String)> = test.paragraphs.iter().zip(candidates.iter().cloned()).collect();
    let scored = score_all(&reward_config, &judge, &items, cfg.output.workers)?;

    if pool_rewards.iter().all(Option::is_some) {
        let mut variant_items = Vec::new();
        for (p, pool) in test.paragraphs.iter().zip(&pool_rewards) {
            for v in &pool.as_ref().expect("checked").variants {
                variant_items.push((p, v.clone()));
            }
        }
        let variant_scores = score_all(&reward_config, &judge, &variant_items, cfg.output.workers)?;
        let mut offset = 0;
        for pool in pool_rewards.iter().flatten() {
            let rewards: Vec<f64> = variant_scores[offset..offset + pool.len()].iter().map(|s| s.breakdown.total).collect();
            offset += pool.len();
            expected.push(expected_reward(&pool.logits, &rewards));
        }
    }

    let bleu_report = if test.references.is_empty() {
        notices.push("no references in the test set; BLEU omitted".into());
        None
    } else {
        let mut refs = Vec::new();
        let mut hyps = Vec::new();
        for (p, hyp) in test.paragraphs.iter().zip(&candidates) {
            if let Some(r) = test.references.get(&p.id) {
                refs.push(tokenize_zh(&strip_boundary(r, &cfg.boundary)));
                hyps.push(tokenize_zh(&strip_boundary(hyp, &cfg.boundary)));
            }
        }
        let missing = test.paragraphs.len() - refs.len();
        if missing > 0 {
            notices.push(format!("{missing} test paragraphs lack references and are excluded from BLEU"));
        }
        Some(BleuReport {
            smoothing: SMOOTHING_NOTE.into(),
            tokenization: "per-character (zh)".into(),
            pairs: refs.len(),
            score: bleu(&refs, &hyps, DEFAULT_MAX_N)?,
        })
    };

    let report = EvalReport {
        policy: policy_name,
        paragraphs: test.paragraphs.len(),
        unseen,
        means: component_means(&scored),
        expected_total: (!expected.is_empty()).then(|| mean_of(expected.iter().copied())),
        judge_calls: scored.iter().filter(|s| s.judge_called).count() as u64,
        degraded: scored.iter().filter(|s| s.degraded.is_some()).count() as u64,
        bleu: bleu_report,
        comet: COMET_NOTICE.into(),
        notices,
    };

    let out = opts.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write_atomic(&out.join(REPORT_FILE), &bytes)?;
    let metrics = cfg.output.dir.join(METRICS_FILE);
    if metrics.is_file() {
        write_trajectory(&read_jsonl(&metrics)?, &out.join(TRAJECTORY_FILE))?;
    } else {
        log::info!("no metrics log at {}; trajectory CSV skipped", metrics.display());
    }
    Ok(report)
}

/// Plot-ready reward trajectory: one row per training step.
pub fn write_trajectory(metrics: &[MetricsRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for m in metrics {
        w.serialize(m).map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    write_atomic(path, &bytes)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SourceText {
    Lines(Vec<String>),
    Joined(String),
}

/// One input line of `score`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreInput {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub lang: Option<Lang>,
    pub source: SourceText,
    pub candidate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreOutput {
    pub id: String,
    #[serde(flatten)]
    pub breakdown: RewardBreakdown,
    pub judge_called: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degraded: Option<String>,
}

pub fn cmd_score(cfg: &RunConfig, input: &Path, output: &Path) -> Result<Vec<ScoreOutput>> {
    let rows: Vec<ScoreInput> = read_jsonl(input)?;
    let mut paragraphs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let id = row.id.clone().unwrap_or_else(|| format!("pair{:04}", i + 1));
        let lines: Vec<String> = match &row.source {
            SourceText::Lines(l) => l.clone(),
            SourceText::Joined(s) => lyricar_core::corpus::segment_candidate(s, &cfg.boundary),
        };
        let p = Paragraph::new(id, row.lang.unwrap_or(cfg.corpus.lang), lines)
            .map_err(|e| Error::Malformed { line: i + 1, message: e.to_string() })?;
        paragraphs.push(p);
    }
    let items: Vec<(&Paragraph, String)> = paragraphs.iter().zip(rows.iter().map(|r| r.candidate.clone())).collect();
    let judge = make_judge(cfg)?;
    let scored = score_all(&cfg.reward_config(), &judge, &items, cfg.output.workers)?;
    let out: Vec<ScoreOutput> = paragraphs
        .iter()
        .zip(scored)
        .map(|(p, s)| ScoreOutput { id: p.id.clone(), breakdown: s.breakdown, judge_called: s.judge_called, degraded: s.degraded })
        .collect();
    write_jsonl(output, &out)?;
    Ok(out)
}

/// `ingest`: parse a corpus and write it as JSONL, either in the input
/// format or with per-line annotations.
pub fn cmd_ingest(
    input: &Path,
    format: crate::corpus_io::CorpusFormat,
    lang: Lang,
    boundary: &str,
    output: &Path,
    annotated: bool,
) -> Result<ParsedCorpus> {
    let parsed = read_corpus(input, format, lang, boundary)?;
    let mut buf = Vec::new();
    let written = if annotated {
        crate::corpus_io::write_annotated(&parsed.paragraphs, &mut buf)
    } else {
        crate::corpus_io::write_corpus_jsonl(&parsed, &mut buf)
    };
    written.map_err(|e| Error::io(output, e))?;
    write_atomic(output, &buf)?;
    Ok(parsed)
}
