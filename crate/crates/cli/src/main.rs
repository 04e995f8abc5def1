//! Command-line front end. Exit codes: 0 success, 2 usage or config
//! error, 3 runtime failure.

mod commands;
mod config;
mod errors;
mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use errors::CliResult;

#[derive(Parser)]
#[command(
    name = "txanomaly",
    version,
    about = "Anomaly detection on imbalanced transaction data: resampling, tree ensembles, metrics, attributions, and rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen features (t-test + target-range), dedup negatives, and emit
    /// the reduced CSV with t-test and correlation plot data.
    Prepare {
        #[arg(long)]
        input: PathBuf,
        /// Input column layout: "full" (12 columns) or "reduced" (7).
        #[arg(long, default_value = "full")]
        schema: String,
        #[arg(long)]
        out_dir: PathBuf,
        /// Keep features whose two-sample p-value is below this.
        #[arg(long, default_value_t = 0.01)]
        p_threshold: f64,
        /// Cap the negative class after dedup.
        #[arg(long)]
        keep_negatives: Option<usize>,
        /// Skip the duplicate-negative removal.
        #[arg(long, default_value_t = false)]
        no_dedup: bool,
    },
    /// Run one resampler over a training CSV.
    Sample {
        #[arg(long)]
        input: PathBuf,
        /// "full", "reduced", or "auto" (header-driven).
        #[arg(long, default_value = "auto")]
        schema: String,
        /// none|rus|nearmiss1|xgbclus|smote|adasyn|smoteenn|smotetomek
        #[arg(long)]
        sampler: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 5)]
        smote_k: usize,
        #[arg(long, default_value_t = 5)]
        adasyn_k: usize,
        #[arg(long, default_value_t = 3)]
        enn_k: usize,
        /// Fraction of the input carved off as the XGBCLUS selector split.
        #[arg(long, default_value_t = 0.2)]
        selector_fraction: f64,
    },
    /// Fit one model and save it as versioned JSON.
    Train {
        #[arg(long)]
        input: PathBuf,
        /// "full", "reduced", or "auto" (header-driven).
        #[arg(long, default_value = "auto")]
        schema: String,
        /// dt|rf|gboost|xgb|adaboost|logistic|stacked|voting_hard|voting_soft
        #[arg(long)]
        model: String,
        /// JSON file with the learner's hyperparameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Fold count for stacked models.
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on a labeled CSV.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// "full", "reduced", or "auto" (header-driven).
        #[arg(long, default_value = "auto")]
        schema: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// KernelSHAP attributions for selected instances.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// "full", "reduced", or "auto" (header-driven).
        #[arg(long, default_value = "auto")]
        schema: String,
        /// "all[:N]", "positives[:N]", "negatives[:N]", or "i,j,k".
        #[arg(long, default_value = "positives:4")]
        instances: String,
        #[arg(long, default_value_t = 100)]
        background_size: usize,
        #[arg(long, default_value_t = 2048)]
        n_coalitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Extract anomaly rules from a saved decision-tree model.
    Rules {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// "full", "reduced", or "auto" (header-driven).
        #[arg(long, default_value = "auto")]
        schema: String,
        /// "anomalous" or "normal".
        #[arg(long, default_value = "anomalous")]
        target: String,
        #[arg(long, default_value_t = 5)]
        min_support: usize,
        #[arg(long, default_value_t = 0.9)]
        min_confidence: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the full sampler x model grid described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Prepare {
            input,
            schema,
            out_dir,
            p_threshold,
            keep_negatives,
            no_dedup,
        } => commands::prepare::run(
            &input,
            &schema,
            &out_dir,
            p_threshold,
            keep_negatives,
            no_dedup,
        ),
        Command::Sample {
            input,
            schema,
            sampler,
            seed,
            out_dir,
            smote_k,
            adasyn_k,
            enn_k,
            selector_fraction,
        } => commands::sample::run(
            &input,
            &schema,
            &sampler,
            seed,
            &out_dir,
            smote_k,
            adasyn_k,
            enn_k,
            selector_fraction,
        ),
        Command::Train {
            input,
            schema,
            model,
            params,
            folds,
            seed,
            out,
        } => commands::train::run(
            &input,
            &schema,
            &model,
            params.as_deref(),
            folds,
            seed,
            &out,
        ),
        Command::Evaluate {
            model,
            input,
            schema,
            out_dir,
        } => commands::evaluate::run(&model, &input, &schema, &out_dir),
        Command::Explain {
            model,
            input,
            schema,
            instances,
            background_size,
            n_coalitions,
            seed,
            out_dir,
        } => commands::explain::run(
            &model,
            &input,
            &schema,
            &instances,
            background_size,
            n_coalitions,
            seed,
            &out_dir,
        ),
        Command::Rules {
            model,
            input,
            schema,
            target,
            min_support,
            min_confidence,
            out_dir,
        } => commands::rules::run(
            &model,
            &input,
            &schema,
            &target,
            min_support,
            min_confidence,
            &out_dir,
        ),
        Command::Experiment { config, out_dir } => commands::experiment::run(&config, out_dir),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
