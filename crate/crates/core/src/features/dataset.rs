use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::moneyness::{classify_moneyness, MoneynessClass};
use super::sentiment::parse_date;
use crate::error::{Error, Result};
use crate::fsutil::ensure_parent;
use crate::market::{years_from_days, VolTrajectory};
use crate::option::OptionKind;
use crate::rng;

/// Rows settling below this price are dropped on ingestion.
pub const MIN_LABEL: f64 = 0.2;

const SPLIT_STREAM: u64 = 0x5e11;

/// One daily option quote.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionContract {
    pub date: NaiveDate,
    pub kind: OptionKind,
    pub strike: f64,
    pub underlying: f64,
    /// Remaining trading days, at least 1.
    pub tau_days: u32,
    /// Settlement price.
    pub label: f64,
}

impl OptionContract {
    pub fn tau(&self) -> f64 {
        years_from_days(self.tau_days)
    }

    pub fn class(&self) -> MoneynessClass {
        classify_moneyness(self.underlying, self.strike, self.kind)
    }

    pub fn moneyness(&self) -> f64 {
        self.underlying / self.strike
    }

    pub fn month(&self) -> String {
        self.date.format("%Y-%m").to_string()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.strike > 0.0
            && self.underlying > 0.0
            && self.strike.is_finite()
            && self.underlying.is_finite()
            && self.label.is_finite()
            && self.tau_days >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Data(format!("invalid contract on {}: {self:?}", self.date)))
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct OptionRecord {
    date: String,
    #[serde(rename = "type")]
    kind: String,
    strike: f64,
    underlying: f64,
    tau_days: u32,
    settlement: f64,
}

/// Reads `options.csv`, dropping expiration-day rows and labels below
/// [`MIN_LABEL`].
pub fn read_options(path: &Path) -> Result<Vec<OptionContract>> {
    if !path.exists() {
        return Err(Error::Data(format!("options file {} does not exist", path.display())));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let (mut out, mut expiring, mut cheap) = (Vec::new(), 0, 0);
    for rec in rdr.deserialize::<OptionRecord>() {
        let r = rec?;
        if r.tau_days == 0 {
            expiring += 1;
            continue;
        }
        if r.settlement < MIN_LABEL {
            cheap += 1;
            continue;
        }
        let c = OptionContract {
            date: parse_date(&r.date)?,
            kind: r.kind.parse().map_err(|_| Error::Data(format!("bad option type {:?}", r.kind)))?,
            strike: r.strike,
            underlying: r.underlying,
            tau_days: r.tau_days,
            label: r.settlement,
        };
        c.validate()?;
        out.push(c);
    }
    if expiring + cheap > 0 {
        info!("dropped {expiring} expiration-day rows and {cheap} rows below {MIN_LABEL}");
    }
    Ok(out)
}

pub fn write_options(path: &Path, rows: &[OptionContract]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for c in rows {
        w.serialize(OptionRecord {
            date: c.date.format("%Y-%m-%d").to_string(),
            kind: c.kind.code().to_string(),
            strike: c.strike,
            underlying: c.underlying,
            tau_days: c.tau_days,
            settlement: c.label,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Forecast volatility blocks keyed by pricing date.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RvForecast {
    blocks: BTreeMap<NaiveDate, Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RvRecord {
    date: String,
    day_index: usize,
    sigma_daily: f64,
}

impl RvForecast {
    pub fn insert(&mut self, date: NaiveDate, daily_sigma: Vec<f64>) {
        self.blocks.insert(date, daily_sigma);
    }

    pub fn dates(&self) -> impl Iterator<Item = &NaiveDate> {
        self.blocks.keys()
    }

    /// The first `days` forecast values for `date`. A shorter block is
    /// extended with its last value.
    pub fn trajectory(&self, date: NaiveDate, days: u32) -> Result<VolTrajectory> {
        let block = self
            .blocks
            .get(&date)
            .ok_or_else(|| Error::Data(format!("no volatility forecast for {date}")))?;
        let days = days.max(1) as usize;
        let mut v: Vec<f64> = block.iter().take(days).copied().collect();
        if v.len() < days {
            warn!(
                "volatility forecast for {date} covers {} of {days} days; extending the last value",
                v.len()
            );
            let last = *v.last().expect("non-empty block");
            v.resize(days, last);
        }
        VolTrajectory::new(v)
    }
}

pub fn read_rv_forecast(path: &Path) -> Result<RvForecast> {
    if !path.exists() {
        return Err(Error::Data(format!("volatility file {} does not exist", path.display())));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut f = RvForecast::default();
    for rec in rdr.deserialize::<RvRecord>() {
        let r = rec?;
        let block = f.blocks.entry(parse_date(&r.date)?).or_default();
        if r.day_index != block.len() {
            return Err(Error::Data(format!(
                "volatility block for {} is not contiguous at day {}",
                r.date, r.day_index
            )));
        }
        block.push(r.sigma_daily);
    }
    Ok(f)
}

pub fn write_rv_forecast(path: &Path, forecast: &RvForecast) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for (date, block) in &forecast.blocks {
        for (i, &s) in block.iter().enumerate() {
            w.serialize(RvRecord {
                date: date.format("%Y-%m-%d").to_string(),
                day_index: i,
                sigma_daily: s,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Split {
    pub train: Vec<OptionContract>,
    pub val: Vec<OptionContract>,
    pub test: Vec<OptionContract>,
}

/// Shuffles distinct dates and assigns them 7:2:1; every contract follows
/// its date.
pub fn split_dataset(contracts: &[OptionContract], seed: u64) -> Result<Split> {
    let mut dates: Vec<NaiveDate> = contracts
        .iter()
        .map(|c| c.date)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = dates.len();
    if n < 10 {
        return Err(Error::Data(format!("need at least 10 trading dates to split, got {n}")));
    }
    rng::shuffle(&mut rng::stream(seed, &[SPLIT_STREAM]), &mut dates);
    let n_train = (0.7 * n as f64).round() as usize;
    let n_val = (0.2 * n as f64).round() as usize;
    let part: BTreeMap<NaiveDate, usize> = dates
        .iter()
        .enumerate()
        .map(|(i, &d)| (d, if i < n_train { 0 } else if i < n_train + n_val { 1 } else { 2 }))
        .collect();
    let mut split = Split::default();
    for c in contracts {
        match part[&c.date] {
            0 => split.train.push(c.clone()),
            1 => split.val.push(c.clone()),
            _ => split.test.push(c.clone()),
        }
    }
    Ok(split)
}
