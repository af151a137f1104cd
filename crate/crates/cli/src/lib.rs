//! Command-line driver: synthetic data, feature extraction, multi-seed
//! training, pricing, evaluation, attribution and the BSM volatility sweep.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use gprice::trainer::Stage;

use commands::{AttributionMethod, TrainStages};
use config::RunConfig;
pub use error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "gprice", version, about = "Deep FBSDE option pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StageArg {
    Pretrain,
    Finetune,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Ig,
    Shapley,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic BSM-priced dataset.
    Simulate,
    /// Compute sentiment feature vectors for every pricing date and class.
    Features,
    /// Pretrain and finetune per seed.
    Train {
        /// Run only this stage (finetune resumes from the pretrain checkpoint).
        #[arg(long, value_enum)]
        stage: Option<StageArg>,
    },
    /// Price the test split with the trained checkpoints.
    Price,
    /// Metrics per bucket on the test split.
    Evaluate,
    /// Attribute pricing gains to volatility and sentiment.
    Attribute {
        /// Both methods when omitted.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Per-month BSM error over a volatility grid.
    BsmSweep,
}

impl Cli {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            // data paths that defaulted into the old output directory follow it
            for p in [&mut cfg.options, &mut cfg.rv_forecast] {
                if let Ok(rest) = p.strip_prefix(&cfg.out) {
                    *p = out.join(rest);
                }
            }
            let guba = out.join("guba_daily.csv");
            match &cfg.guba_daily {
                Some(g) if g.starts_with(&cfg.out) => cfg.guba_daily = Some(guba),
                None if guba.exists() => cfg.guba_daily = Some(guba),
                _ => {}
            }
            cfg.out = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
            cfg.simulate.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.run_config()?;
    match &cli.command {
        Command::Simulate => commands::cmd_simulate(&cfg),
        Command::Features => commands::cmd_features(&cfg),
        Command::Train { stage } => {
            let stages = match stage {
                None => TrainStages::Both,
                Some(StageArg::Pretrain) => TrainStages::Only(Stage::Pretrain),
                Some(StageArg::Finetune) => TrainStages::Only(Stage::Finetune),
            };
            commands::cmd_train(&cfg, stages)
        }
        Command::Price => commands::cmd_price(&cfg),
        Command::Evaluate => commands::cmd_evaluate(&cfg).map(|_| ()),
        Command::Attribute { method } => {
            let methods = match method {
                None => vec![AttributionMethod::Ig, AttributionMethod::Shapley],
                Some(MethodArg::Ig) => vec![AttributionMethod::Ig],
                Some(MethodArg::Shapley) => vec![AttributionMethod::Shapley],
            };
            commands::cmd_attribute(&cfg, &methods)
        }
        Command::BsmSweep => commands::cmd_bsm_sweep(&cfg),
    }
}
