use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ClientKind;

/// Frame-element misinformation detection: corpus building, training and
/// evaluation from one config file.
#[derive(Debug, Parser)]
#[command(name = "femkit", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Directory for this command's artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Completion backend for commands that call a language model.
    #[arg(long, global = true, value_enum)]
    pub client: Option<ClientKind>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a paired original/altered corpus from raw articles.
    Augment {
        /// Articles as JSONL (`id`, `body`, optional `topic`, `frame_label`).
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Also export this fraction of altered samples for manual review.
        #[arg(long, value_name = "F")]
        review_fraction: Option<f64>,
    },
    /// Write the synthetic corpus and a matching config.
    Synth,
    /// Train a model and save its best checkpoint.
    Train(DataArgs),
    /// Score a checkpoint on a corpus.
    Evaluate {
        #[arg(long, value_name = "DIR")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        corpus: Option<PathBuf>,
        /// `all`, `text-only`, `frames-only` or five 0/1 digits
        /// (article, problem, causal, moral, treatment).
        #[arg(long, default_value = "all")]
        mask: String,
    },
    /// Train and score one model per element configuration.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        /// `default` or a JSON plan file.
        #[arg(long, default_value = "default")]
        plan: String,
        /// Replay a reference results table instead of training.
        #[arg(long, value_name = "TABLE")]
        fixtures: Option<String>,
    },
    /// Similarity of paired samples against F1, per element condition.
    Similarity {
        #[arg(long, value_name = "DIR")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        corpus: Option<PathBuf>,
        /// Replay the reference similarity table (`table6`).
        #[arg(long, value_name = "TABLE")]
        fixtures: Option<String>,
        #[arg(long, value_enum, default_value = "hidden-state")]
        representation: RepresentationArg,
    },
    /// Compare two articles side by side.
    Compare {
        #[arg(long, value_name = "DIR")]
        checkpoint: Option<PathBuf>,
        /// Article JSON (`id`, `body`).
        #[arg(long, value_name = "PATH")]
        article_a: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        article_b: Option<PathBuf>,
        /// Use the reference case-study excerpts (`case-study`).
        #[arg(long, value_name = "NAME")]
        fixtures: Option<String>,
    },
    /// Collect a run directory's artifacts into report.md.
    Report {
        #[arg(value_name = "RUN_DIR")]
        run_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Corpus to split with the `[split]` settings.
    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires_all = ["val", "test"])]
    pub train: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires_all = ["train", "test"])]
    pub val: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires_all = ["train", "val"])]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RepresentationArg {
    HiddenState,
    SegmentEmbeddings,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Augment { .. } => "augment",
            Command::Synth => "synth",
            Command::Train(_) => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Ablate { .. } => "ablate",
            Command::Similarity { .. } => "similarity",
            Command::Compare { .. } => "compare",
            Command::Report { .. } => "report",
        }
    }
}
