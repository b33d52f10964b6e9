//! Command-line orchestration: feature extraction, data preparation,
//! hyperparameter evolution, training, evaluation, analysis and prediction.

pub mod commands;
pub mod config;
pub mod error;
pub mod learners;
pub mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "NEATBOOST_SEED";

#[derive(Debug, Parser)]
#[command(name = "neatboost", version, about = "Fillet myopathy classification pipeline")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed. Falls back to the config file, then NEATBOOST_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for every artifact.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Maximum number of concurrent evaluations.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Raise log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the 16 descriptors for a directory of PGM/PNG images.
    Extract(ExtractArgs),
    /// Write a synthetic three-class feature table.
    Synth(SynthArgs),
    /// Stratified train/validation/test split of a feature table.
    Split(SplitArgs),
    /// Evolve hyperparameters for both learners.
    Evolve(EvolveArgs),
    /// Fit the learners, optimize fusion weights and write the manifest.
    Train(TrainArgs),
    /// Score a trained ensemble on a labeled table.
    Evaluate(EvaluateArgs),
    /// ANOVA, LDA projection and feature ranking.
    Analyze(AnalyzeArgs),
    /// Class probabilities for a feature table.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory holding the images.
    #[arg(long)]
    pub images: PathBuf,
    /// CSV with `file,label` columns.
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub separation: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Train, validation and test shares, e.g. `0.7,0.1,0.2`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub fractions: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Population size of both NEAT runs.
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Development table (train and validation rows).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Evolution output; defaults to `best_hyperparameters.json` in the output directory.
    #[arg(long, conflicts_with = "manual")]
    pub hyperparameters: Option<PathBuf>,
    /// JSON object `{"gbdt": {...}, "mlp": {...}}` used instead of evolved values.
    #[arg(long)]
    pub manual: Option<PathBuf>,
    /// Fixed fusion weights, one per model; skips the weight search.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labeled test table.
    #[arg(long)]
    pub test: PathBuf,
    /// Defaults to `manifest.json` in the output directory.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Boosted model whose gain importance joins the ranking.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub components: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Feature table; the label column is optional.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
    /// Whether a config file was given, which enables drift checks.
    pub config_given: bool,
}

impl Context {
    pub fn output(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn data_path(&self, flag: Option<&Path>) -> CliResult<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.cfg.paths.data.clone())
            .ok_or_else(|| CliError::Usage("no input table: pass --data or set paths.data".into()))
    }
}

fn resolve(cli: &Cli) -> CliResult<Context> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if cfg.seed.is_none() {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let s = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
            cfg.seed = Some(s);
        }
    }
    if let Some(o) = &cli.out {
        cfg.paths.output = o.clone();
    }
    match &cli.command {
        Command::Synth(a) => {
            if let Some(n) = a.n_per_class {
                cfg.synth.n_per_class = n;
            }
            if let Some(s) = a.separation {
                cfg.synth.separation = s;
            }
        }
        Command::Split(a) => {
            if let Some(f) = &a.fractions {
                cfg.split.fractions = [f[0], f[1], f[2]];
            }
        }
        Command::Evolve(a) => {
            if let Some(p) = a.population {
                cfg.neat.gbdt.population_size = p;
                cfg.neat.mlp.population_size = p;
            }
            if let Some(g) = a.generations {
                cfg.neat.gbdt.generations = g;
                cfg.neat.mlp.generations = g;
            }
            if let Some(k) = a.folds {
                cfg.split.folds = k;
            }
            if let Some(k) = a.top_k {
                cfg.ensemble.top_k = k;
            }
        }
        Command::Train(a) => {
            if let Some(k) = a.folds {
                cfg.split.folds = k;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    let seed = cfg.seed()?;
    let out = cfg.paths.output.clone();
    std::fs::create_dir_all(&out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    Ok(Context {
        cfg,
        seed,
        out,
        config_given: cli.config.is_some(),
    })
}

fn dispatch(cli: &Cli, ctx: &Context) -> CliResult<()> {
    match &cli.command {
        Command::Extract(a) => commands::extract::run(ctx, a),
        Command::Synth(_) => commands::synth::run(ctx),
        Command::Split(a) => commands::split::run(ctx, a),
        Command::Evolve(a) => commands::evolve::run(ctx, a),
        Command::Train(a) => commands::train::run(ctx, a),
        Command::Evaluate(a) => commands::evaluate::run(ctx, a),
        Command::Analyze(a) => commands::analyze::run(ctx, a),
        Command::Predict(a) => commands::predict::run(ctx, a),
    }
}

/// Execute a parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let ctx = resolve(cli)?;
    log::info!(
        "run start command={} seed={} out={}",
        command_name(&cli.command),
        ctx.seed,
        ctx.out.display()
    );
    match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?
            .install(|| dispatch(cli, &ctx)),
        None => dispatch(cli, &ctx),
    }
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Extract(_) => "extract",
        Command::Synth(_) => "synth",
        Command::Split(_) => "split",
        Command::Evolve(_) => "evolve",
        Command::Train(_) => "train",
        Command::Evaluate(_) => "evaluate",
        Command::Analyze(_) => "analyze",
        Command::Predict(_) => "predict",
    }
}
