//! TOML run configuration.
//!
//! Every section overlays its defaults, so a config only lists what it
//! changes. Relative paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use gprice::nets::NetConfig;
use gprice::synthetic::SyntheticConfig;
use gprice::trainer::TrainConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const DEFAULT_SWEEP_GRID: [f64; 5] = [0.10, 0.15, 0.20, 0.25, 0.30];

/// Input files. Unset paths default to the standard names inside `out`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub options: Option<PathBuf>,
    pub rv_forecast: Option<PathBuf>,
    pub guba_daily: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub out: PathBuf,
    pub seeds: Vec<u64>,
    /// Risk-free rate fed to every contract.
    pub rate: f64,
    pub ig_steps: usize,
    pub sweep_grid: Vec<f64>,
    /// `false` keeps every sentiment gate at 0 through finetuning.
    pub sentiment: bool,
    pub options: PathBuf,
    pub rv_forecast: PathBuf,
    /// `None` when no forum file is configured or present; sentiment is
    /// then all zeros.
    pub guba_daily: Option<PathBuf>,
    pub simulate: SyntheticConfig,
    pub value: NetConfig,
    pub generator: NetConfig,
    pub pretrain: TrainConfig,
    pub finetune: TrainConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    out: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    rate: Option<f64>,
    ig_steps: Option<usize>,
    sweep_grid: Option<Vec<f64>>,
    sentiment: Option<bool>,
    #[serde(default)]
    data: DataPaths,
    simulate: Option<toml::Table>,
    value: Option<toml::Table>,
    generator: Option<toml::Table>,
    pretrain: Option<toml::Table>,
    finetune: Option<toml::Table>,
}

/// `base` with the keys of `table` replaced.
fn overlay<T: Serialize + DeserializeOwned>(section: &str, base: T, table: Option<toml::Table>) -> Result<T> {
    let Some(table) = table else { return Ok(base) };
    let mut merged = toml::Table::try_from(&base)
        .map_err(|e| CliError::Config(format!("[{section}]: {e}")))?;
    merged.extend(table);
    merged
        .try_into()
        .map_err(|e| CliError::Config(format!("[{section}]: {e}")))
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(RawConfig::default(), Path::new("")).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        RunConfig::from_raw(raw, base)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        RunConfig::parse(&text, base)
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Self> {
        let out = resolve(base, raw.out.unwrap_or_else(|| PathBuf::from("runs")));
        let data_path = |p: Option<PathBuf>, name: &str| match p {
            Some(p) => resolve(base, p),
            None => out.join(name),
        };
        let guba_explicit = raw.data.guba_daily.is_some();
        let guba = data_path(raw.data.guba_daily, "guba_daily.csv");
        let cfg = RunConfig {
            seeds: raw.seeds.unwrap_or_else(|| DEFAULT_SEEDS.to_vec()),
            rate: raw.rate.unwrap_or(0.0),
            ig_steps: raw.ig_steps.unwrap_or(gprice::xai::IG_STEPS),
            sweep_grid: raw.sweep_grid.unwrap_or_else(|| DEFAULT_SWEEP_GRID.to_vec()),
            sentiment: raw.sentiment.unwrap_or(true),
            options: data_path(raw.data.options, "options.csv"),
            rv_forecast: data_path(raw.data.rv_forecast, "rv_forecast.csv"),
            guba_daily: (guba_explicit || guba.exists()).then_some(guba),
            simulate: overlay("simulate", SyntheticConfig::default(), raw.simulate)?,
            value: overlay("value", NetConfig::value(), raw.value)?,
            generator: overlay("generator", NetConfig::generator(), raw.generator)?,
            pretrain: overlay("pretrain", TrainConfig::pretrain(), raw.pretrain)?,
            finetune: overlay("finetune", TrainConfig::finetune(), raw.finetune)?,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must not be empty".into()));
        }
        if self.ig_steps == 0 {
            return Err(CliError::Config("ig_steps must be positive".into()));
        }
        if self.sweep_grid.is_empty() || self.sweep_grid.iter().any(|s| !(*s > 0.0)) {
            return Err(CliError::Config("sweep_grid needs positive volatilities".into()));
        }
        if !self.rate.is_finite() {
            return Err(CliError::Config("rate must be finite".into()));
        }
        self.value.validate()?;
        self.generator.validate()?;
        if self.value.price_scale != self.generator.price_scale {
            return Err(CliError::Config(
                "[value] and [generator] must use the same price_scale".into(),
            ));
        }
        self.pretrain.validate()?;
        self.finetune.validate()?;
        Ok(())
    }

    /// Checks that the training inputs exist before anything runs.
    pub fn require_inputs(&self) -> Result<()> {
        let mut paths = vec![&self.options, &self.rv_forecast];
        paths.extend(&self.guba_daily);
        for p in paths {
            if !p.is_file() {
                return Err(gprice::Error::Data(format!("input file {} does not exist", p.display())).into());
            }
        }
        Ok(())
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.out.join(format!("seed_{seed}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_overlay_their_own_defaults() {
        let cfg = RunConfig::parse(
            "seeds = [7]\n[finetune]\nsteps = 20\nwarmup = 2\n[value]\nhidden = [8, 4]\n",
            Path::new("/tmp/x"),
        )
        .unwrap();
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.finetune.steps, 20);
        assert_eq!(cfg.finetune.peak_lr, TrainConfig::finetune().peak_lr);
        assert_eq!(cfg.pretrain, TrainConfig::pretrain());
        assert_eq!(cfg.value.hidden, vec![8, 4]);
        assert_eq!(cfg.value.expansion_width, 50);
        assert_eq!(cfg.options, Path::new("/tmp/x/runs/options.csv"));
    }

    #[test]
    fn rejects_unknown_keys_and_empty_seeds() {
        let base = Path::new("");
        assert!(RunConfig::parse("seeds = []", base).is_err());
        assert!(RunConfig::parse("bogus = 1", base).is_err());
        assert!(RunConfig::parse("[pretrain]\nsteps_total = 3", base).is_err());
        let e = RunConfig::parse("[pretrain]\nsteps = 10\nwarmup = 10", base).unwrap_err();
        assert_eq!(e.exit_code(), crate::error::exit::CONFIG);
    }
}
