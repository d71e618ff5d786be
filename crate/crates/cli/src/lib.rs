//! The `psda` command line: clustering, augmentation, regularizer losses,
//! gradient verification and cluster reports over the core library.

pub mod commands;
pub mod config;
pub mod error;
pub mod records;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

pub use config::PipelineConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "psda", version, about = "Domino clustering, SVO replacement and OT regularization")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Key-value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` config assignment; may repeat.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the three clustering stages and write the model file.
    Cluster {
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
    /// Replace SVO embeddings with cross-lingual cluster mates.
    Augment {
        /// Model file (default `<output_dir>/model.psda`).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        copies: Option<u32>,
    },
    /// Regularizer losses for original/augmented pairs.
    Loss {
        #[arg(long)]
        original: Option<PathBuf>,
        #[arg(long)]
        augmented: Option<PathBuf>,
        /// Binary sidecar for the gradients with respect to the augmented matrices.
        #[arg(long)]
        grad_out: Option<PathBuf>,
        /// Task loss folded into `loss_total`; task heads live outside this tool.
        #[arg(long, default_value_t = 0.0)]
        task_loss: f64,
    },
    /// Finite-difference verification of the analytic gradients.
    Gradcheck {
        #[arg(long)]
        seeds: Option<u64>,
        /// Scale analytic gradients by 1.01 (negative control).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Cluster-quality CSV, per-stage metrics and a PCA scatter.
    Report {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// Resolves the effective configuration: defaults, then the file, then flags.
pub fn resolve_config(global: &GlobalArgs) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    for assignment in &global.set {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
        cfg.set(k.trim(), v.trim(), Path::new("."))?;
    }
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(t) = global.threads {
        cfg.threads = Some(t);
    }
    if let Some(o) = &global.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

/// Runs a parsed command line and returns the JSON summary it printed.
pub fn run(cli: Cli) -> Result<Value, CliError> {
    let mut cfg = resolve_config(&cli.global)?;
    match &cli.command {
        Command::Cluster { taxonomy: Some(t) } => cfg.taxonomy = Some(t.clone()),
        Command::Augment { copies: Some(c), .. } => cfg.copies = *c,
        _ => {}
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config("threads", e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Cluster { .. } => commands::cluster::run(&cfg),
        Command::Augment { model, .. } => commands::augment::run(&cfg, model.as_deref()),
        Command::Loss { original, augmented, grad_out, task_loss } => commands::loss::run(
            &cfg,
            original.as_deref(),
            augmented.as_deref(),
            grad_out.as_deref(),
            task_loss,
        ),
        Command::Gradcheck { seeds, corrupt } => commands::gradcheck::run(&cfg, seeds, corrupt),
        Command::Report { model } => commands::report::run(&cfg, model.as_deref()),
    })
}
