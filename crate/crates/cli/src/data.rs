//! Loading the configured inputs and turning contracts into engine inputs.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use gprice::bsde::PricingInput;
use gprice::features::{
    read_guba, read_options, read_rv_forecast, MoneynessClass, OptionContract, RvForecast,
    SentimentHistory,
};
use gprice::nets::SentimentVector;
use log::{info, warn};

use crate::config::RunConfig;
use crate::error::Result;

pub struct Dataset {
    pub contracts: Vec<OptionContract>,
    pub forecast: RvForecast,
    sentiment: BTreeMap<(NaiveDate, MoneynessClass), SentimentVector>,
}

impl Dataset {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        cfg.require_inputs()?;
        let contracts = read_options(&cfg.options)?;
        if contracts.is_empty() {
            return Err(gprice::Error::Data(format!("{} has no usable contracts", cfg.options.display())).into());
        }
        let forecast = read_rv_forecast(&cfg.rv_forecast)?;
        let history = match &cfg.guba_daily {
            Some(p) => Some(SentimentHistory::new(read_guba(p)?)?),
            None => {
                warn!("no forum file configured; sentiment features are zero");
                None
            }
        };
        let mut sentiment = BTreeMap::new();
        for c in &contracts {
            sentiment
                .entry((c.date, c.class()))
                .or_insert_with(|| history.as_ref().map_or([0.0; 5], |h| h.features(c.date, c.class())));
        }
        info!("loaded {} contracts", contracts.len());
        Ok(Dataset { contracts, forecast, sentiment })
    }

    pub fn sentiment(&self, c: &OptionContract) -> SentimentVector {
        self.sentiment[&(c.date, c.class())]
    }

    /// Engine inputs on an `n`-step grid.
    pub fn inputs(&self, contracts: &[OptionContract], n: usize, rate: f64) -> Result<Vec<PricingInput>> {
        contracts
            .iter()
            .map(|c| {
                let traj = self.forecast.trajectory(c.date, c.tau_days)?;
                Ok(PricingInput::from_contract(c, &traj, self.sentiment(c), n, rate))
            })
            .collect()
    }
}
