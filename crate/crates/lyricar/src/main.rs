use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use lyricar::config::RunConfig;
use lyricar::core::corpus::{Lang, DEFAULT_BOUNDARY};
use lyricar::corpus_io::CorpusFormat;
use lyricar::pipeline::{self, EvalOptions, TrainOptions};

#[derive(Parser)]
#[command(name = "lyricar", version, about = "Curriculum GRPO training for lyric translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a plaintext or JSONL corpus and write it as JSONL.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "plaintext")]
        format: CorpusFormat,
        #[arg(long, default_value = "en")]
        lang: Lang,
        #[arg(long, default_value = DEFAULT_BOUNDARY)]
        boundary: String,
        #[arg(long)]
        output: PathBuf,
        /// Emit syllable counts and rhyme classes per line.
        #[arg(long)]
        annotated: bool,
    },
    /// Score difficulty and write per-paragraph profiles with tiers.
    Stratify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample the stage datasets and write the stage manifest.
    BuildStages {
        #[arg(long)]
        config: PathBuf,
        /// Profiles from `stratify`; recomputed when absent.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run curriculum training.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Check the wiring without training.
        #[arg(long)]
        dry_run: bool,
        /// Stop after this many epochs; the run can be resumed.
        #[arg(long)]
        max_epochs: Option<usize>,
    },
    /// Score the greedy decode on a test set and write a report.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score (source, candidate) pairs from JSONL.
    Score {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load(path: &std::path::Path) -> anyhow::Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { input, format, lang, boundary, output, annotated } => {
            let c = pipeline::cmd_ingest(&input, format, lang, &boundary, &output, annotated)?;
            println!("ingested {} paragraphs ({} dropped) -> {}", c.paragraphs.len(), c.dropped, output.display());
        }
        Command::Stratify { config, output } => {
            let cfg = load(&config)?;
            let output = output.unwrap_or_else(|| cfg.output.dir.join(pipeline::PROFILES_FILE));
            let profiles = pipeline::cmd_stratify(&cfg, &output)?;
            println!("profiled {} paragraphs -> {}", profiles.len(), output.display());
        }
        Command::BuildStages { config, profiles, output } => {
            let cfg = load(&config)?;
            let output = output.unwrap_or_else(|| cfg.output.dir.join(pipeline::STAGES_FILE));
            let stages = pipeline::cmd_build_stages(&cfg, profiles.as_deref(), &output)?;
            for (i, counts) in lyricar::manifest::tier_table(&stages).iter().enumerate() {
                println!("stage {}: {:?}", i + 1, counts);
            }
            println!("-> {}", output.display());
        }
        Command::Train { config, resume, dry_run, max_epochs } => {
            let cfg = load(&config)?;
            let s = pipeline::cmd_train(&cfg, &TrainOptions { resume, dry_run, max_epochs })?;
            println!(
                "status {:?}: {} epochs, {} steps, stage {}, expected reward {:.4} -> {}",
                s.status,
                s.epochs,
                s.steps,
                s.final_stage,
                s.initial_reward,
                s.final_reward.map_or("n/a".to_string(), |r| format!("{r:.4}"))
            );
        }
        Command::Evaluate { config, checkpoint, test, out } => {
            let cfg = load(&config)?;
            let r = pipeline::cmd_evaluate(&cfg, &EvalOptions { checkpoint, test_path: test, out_dir: out })?;
            let m = &r.means;
            println!(
                "{} paragraphs: fmt {:.4} rtm {:.4} rym {:.4} txtq {:.4} total {:.4}",
                r.paragraphs, m.fmt, m.rtm, m.rym, m.txtq, m.total
            );
            match &r.bleu {
                Some(b) => println!("BLEU {:.2} ({})", b.score.score, b.smoothing),
                None => println!("BLEU: omitted"),
            }
            println!("{}", r.comet);
            for n in &r.notices {
                println!("note: {n}");
            }
        }
        Command::Score { config, input, output } => {
            let cfg = match config {
                Some(path) => load(&path)?,
                None => {
                    let mut c = RunConfig::default();
                    c.apply_env();
                    c.validate()?;
                    c
                }
            };
            let rows = pipeline::cmd_score(&cfg, &input, &output)?;
            println!("scored {} pairs -> {}", rows.len(), output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
