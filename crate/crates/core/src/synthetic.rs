//! Black-Scholes labelled contracts with matching volatility forecasts and
//! forum history, for end-to-end checks.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{GubaDaily, OptionContract, RvForecast, MIN_LABEL};
use crate::market::{bsm_price, TRADING_DAYS};
use crate::option::OptionKind;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub contracts: usize,
    /// Volatility used for both the underlying and the labels.
    pub sigma: f64,
    pub rate: f64,
    /// Standard deviation of multiplicative label noise.
    pub noise: f64,
    pub x0: f64,
    /// First trading date, `YYYY-MM-DD`.
    pub start: String,
    pub trading_days: usize,
    /// Range of X/K.
    pub moneyness: (f64, f64),
    pub strike_step: f64,
    pub tau_days: (u32, u32),
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            contracts: 5000,
            sigma: 0.2,
            rate: 0.0,
            noise: 0.0,
            x0: 4000.0,
            start: "2022-01-04".into(),
            trading_days: 240,
            moneyness: (0.9, 1.1),
            strike_step: 50.0,
            tau_days: (5, 120),
            seed: 2022,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub contracts: Vec<OptionContract>,
    pub forecast: RvForecast,
    pub forum: Vec<GubaDaily>,
}

fn trading_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    let start = NaiveDate::parse_from_str(&cfg.start, "%Y-%m-%d")
        .map_err(|e| Error::Config(format!("bad start date {:?}: {e}", cfg.start)))?;
    let (lo, hi) = cfg.moneyness;
    if cfg.trading_days == 0
        || !(cfg.sigma > 0.0 && cfg.x0 > 0.0 && lo > 0.0 && lo < hi && cfg.noise >= 0.0)
        || cfg.tau_days.0 == 0
        || cfg.tau_days.0 > cfg.tau_days.1
    {
        return Err(Error::Config("invalid synthetic data settings".into()));
    }
    let dates = trading_dates(start, cfg.trading_days);
    // daily underlying under the same volatility
    let mut r = rng::stream(cfg.seed, &[1]);
    let dt = 1.0 / TRADING_DAYS;
    let mut spot = Vec::with_capacity(dates.len());
    let mut x = cfg.x0;
    for _ in &dates {
        spot.push(x);
        let xi = rng::standard_normal(&mut r);
        x *= ((cfg.rate - 0.5 * cfg.sigma * cfg.sigma) * dt + cfg.sigma * dt.sqrt() * xi).exp();
    }
    let mut contracts = Vec::with_capacity(cfg.contracts);
    let mut r = rng::stream(cfg.seed, &[2]);
    let mut attempts = 0usize;
    while contracts.len() < cfg.contracts {
        attempts += 1;
        if attempts > 100 * cfg.contracts.max(1) {
            return Err(Error::Config("synthetic settings produce too few labels above the floor".into()));
        }
        let d = rng::index(&mut r, dates.len());
        let kind = if rng::uniform_open(&mut r) < 0.5 { OptionKind::Call } else { OptionKind::Put };
        let m = lo + (hi - lo) * rng::uniform_open(&mut r);
        let raw_k = spot[d] / m;
        let strike = if cfg.strike_step > 0.0 {
            ((raw_k / cfg.strike_step).round() * cfg.strike_step).max(cfg.strike_step)
        } else {
            raw_k
        };
        let span = (cfg.tau_days.1 - cfg.tau_days.0 + 1) as usize;
        let tau_days = cfg.tau_days.0 + rng::index(&mut r, span) as u32;
        let tau = tau_days as f64 / TRADING_DAYS;
        let mut label = bsm_price(spot[d], strike, tau, cfg.sigma, cfg.rate, kind);
        if cfg.noise > 0.0 {
            label *= 1.0 + cfg.noise * rng::standard_normal(&mut r);
        }
        if label < MIN_LABEL {
            continue;
        }
        contracts.push(OptionContract {
            date: dates[d],
            kind,
            strike,
            underlying: spot[d],
            tau_days,
            label,
        });
    }
    contracts.sort_by(|a, b| a.date.cmp(&b.date).then(a.kind.cmp(&b.kind)).then(a.strike.total_cmp(&b.strike)));

    let mut forecast = RvForecast::default();
    for &d in &dates {
        forecast.insert(d, vec![cfg.sigma; cfg.tau_days.1 as usize]);
    }

    let mut forum = Vec::new();
    let mut r = rng::stream(cfg.seed, &[3]);
    let mut day = start - Days::new(45);
    let last = *dates.last().expect("at least one date");
    while day <= last {
        let posts = 200 + rng::index(&mut r, 400) as u64;
        let bull = rng::index(&mut r, (posts / 2) as usize) as u64;
        let bear = rng::index(&mut r, (posts / 2) as usize) as u64;
        forum.push(GubaDaily {
            date: day,
            n_bull: bull,
            n_bear: bear,
            posts_count: posts,
            views_sum: posts * (50 + rng::index(&mut r, 100) as u64),
            comments_sum: posts * rng::index(&mut r, 5) as u64,
        });
        day = day + Days::new(1);
    }
    Ok(SyntheticData { contracts, forecast, forum })
}
