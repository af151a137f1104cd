use std::path::Path;

use chrono::NaiveDate;
use log::warn;
use serde::{Deserialize, Serialize};

use super::ewm::EwmState;
use super::moneyness::MoneynessClass;
use crate::error::{Error, Result};
use crate::nets::{SentimentVector, SENTIMENT_DIM};

/// Stabiliser in every ratio.
pub const EPS: f64 = 1e-8;
/// Calendar days after the first record during which flags are held at 0.
pub const BURN_IN_DAYS: i64 = 30;

const DATE_FMT: &str = "%Y-%m-%d";

/// Daily forum aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GubaDaily {
    pub date: NaiveDate,
    pub n_bull: u64,
    pub n_bear: u64,
    pub posts_count: u64,
    pub views_sum: u64,
    pub comments_sum: u64,
}

impl GubaDaily {
    pub fn validate(&self) -> Result<()> {
        if self.n_bull + self.n_bear > self.posts_count {
            return Err(Error::Data(format!(
                "{}: bullish + bearish titles exceed post count",
                self.date
            )));
        }
        Ok(())
    }

    pub fn net_sent(&self) -> f64 {
        (self.n_bull as f64 - self.n_bear as f64) / (self.posts_count as f64 + EPS)
    }

    pub fn activity(&self) -> f64 {
        (self.posts_count as f64).ln_1p() + (self.views_sum as f64).ln_1p() + (self.comments_sum as f64).ln_1p()
    }

    /// Binary entropy of the bullish share, with 0 ln 0 = 0.
    pub fn entropy(&self) -> f64 {
        let p = self.n_bull as f64 / (self.posts_count as f64 + EPS);
        let h = |q: f64| if q > 0.0 { q * q.ln() } else { 0.0 };
        -(h(p) + h(1.0 - p))
    }
}

/// Per-day indicator values computed causally over a sorted history.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DayFeatures {
    date: NaiveDate,
    atm: SentimentVector,
    otm: SentimentVector,
}

/// Feature series for a forum history.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentHistory {
    days: Vec<DayFeatures>,
    start: NaiveDate,
}

impl SentimentHistory {
    /// Rows may come in any order; duplicate dates are rejected.
    pub fn new(mut rows: Vec<GubaDaily>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("forum history is empty".into()));
        }
        rows.sort_by_key(|r| r.date);
        for w in rows.windows(2) {
            if w[0].date == w[1].date {
                return Err(Error::Data(format!("duplicate forum date {}", w[0].date)));
            }
        }
        let start = rows[0].date;
        let (mut s3, mut s5, mut s30, mut act) =
            (EwmState::new(3.0), EwmState::new(5.0), EwmState::new(30.0), EwmState::new(10.0));
        let mut days = Vec::with_capacity(rows.len());
        let mut gaps = 0;
        for (i, row) in rows.iter().enumerate() {
            row.validate()?;
            if i > 0 && (row.date - rows[i - 1].date).num_days() > 1 {
                gaps += 1;
            }
            let ns = row.net_sent();
            let a = row.activity();
            s3.update(ns);
            s5.update(ns);
            s30.update(ns);
            act.update(a);
            let z_act = (a - act.mean()) / (act.std() + EPS);
            let z30 = (ns - s30.mean()) / (s30.std() + EPS);
            let burn_in = (row.date - start).num_days() < BURN_IN_DAYS;
            let flag = |on: bool| if on && !burn_in { 1.0 } else { 0.0 };
            days.push(DayFeatures {
                date: row.date,
                atm: [ns, ns - s3.mean(), s3.std(), z_act, row.entropy()],
                otm: [ns - s5.mean(), s5.std(), flag(z30.abs() > 2.0), flag(z_act > 1.5), s5.mean()],
            });
        }
        if gaps > 0 {
            warn!("forum history has {gaps} calendar gaps; features carry forward across them");
        }
        Ok(SentimentHistory { days, start })
    }

    pub fn in_burn_in(&self, date: NaiveDate) -> bool {
        (date - self.start).num_days() < BURN_IN_DAYS
    }

    /// Feature vector for `class` on `date`, using only records up to that
    /// date. Missing dates reuse the latest earlier record.
    pub fn features(&self, date: NaiveDate, class: MoneynessClass) -> SentimentVector {
        if class == MoneynessClass::Itm {
            return [0.0; SENTIMENT_DIM];
        }
        let idx = self.days.partition_point(|d| d.date <= date);
        if idx == 0 {
            warn!("no forum history on or before {date}; using zero sentiment");
            return [0.0; SENTIMENT_DIM];
        }
        let day = &self.days[idx - 1];
        if day.date != date {
            warn!("no forum record for {date}; carrying forward {}", day.date);
        }
        match class {
            MoneynessClass::Atm => day.atm,
            _ => day.otm,
        }
    }
}

/// One-shot evaluation on the records dated up to `date`.
pub fn sentiment_features(
    history: &[GubaDaily],
    date: NaiveDate,
    class: MoneynessClass,
) -> Result<SentimentVector> {
    let past: Vec<GubaDaily> = history.iter().filter(|r| r.date <= date).copied().collect();
    if past.is_empty() {
        return Err(Error::Data(format!("no forum history on or before {date}")));
    }
    Ok(SentimentHistory::new(past)?.features(date, class))
}

/// Feature order per class.
pub fn feature_names(class: MoneynessClass) -> [&'static str; SENTIMENT_DIM] {
    match class {
        MoneynessClass::Atm => ["net_sent", "surprise_3", "disp_3", "z_activity", "entropy"],
        MoneynessClass::Otm => ["surprise_5", "disp_5", "extreme_flag", "vol_shock_flag", "ewm_net_sent_5"],
        MoneynessClass::Itm => ["zero_0", "zero_1", "zero_2", "zero_3", "zero_4"],
    }
}

/// Writes `class,position,feature` rows describing the vector layout.
pub fn write_feature_manifest(path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["class", "position", "feature"])?;
    for class in MoneynessClass::ALL {
        for (i, name) in feature_names(class).iter().enumerate() {
            w.write_record([class.name(), &i.to_string(), name])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct GubaRecord {
    date: String,
    n_bull: u64,
    n_bear: u64,
    posts_count: u64,
    views_sum: u64,
    comments_sum: u64,
}

pub(crate) fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FMT)
        .map_err(|e| Error::Data(format!("bad date {s:?}: {e}")))
}

pub fn read_guba(path: &Path) -> Result<Vec<GubaDaily>> {
    if !path.exists() {
        return Err(Error::Data(format!("forum file {} does not exist", path.display())));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<GubaRecord>() {
        let r = rec?;
        let row = GubaDaily {
            date: parse_date(&r.date)?,
            n_bull: r.n_bull,
            n_bear: r.n_bear,
            posts_count: r.posts_count,
            views_sum: r.views_sum,
            comments_sum: r.comments_sum,
        };
        row.validate()?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_guba(path: &Path, rows: &[GubaDaily]) -> Result<()> {
    crate::fsutil::ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(GubaRecord {
            date: r.date.format(DATE_FMT).to_string(),
            n_bull: r.n_bull,
            n_bear: r.n_bear,
            posts_count: r.posts_count,
            views_sum: r.views_sum,
            comments_sum: r.comments_sum,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32, bull: u64, bear: u64, posts: u64) -> GubaDaily {
        GubaDaily {
            date: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap() + chrono::Days::new(d as u64),
            n_bull: bull,
            n_bear: bear,
            posts_count: posts,
            views_sum: 1000,
            comments_sum: 50,
        }
    }

    #[test]
    fn table_examples() {
        let d = day(0, 10, 4, 20);
        assert!((d.net_sent() - 0.3).abs() < 1e-9);
        assert_eq!(day(0, 10, 10, 20).entropy(), std::f64::consts::LN_2);
        assert_eq!(day(0, 0, 5, 20).entropy(), 0.0);
    }

    #[test]
    fn constant_history_is_quiet() {
        let rows: Vec<_> = (0..60).map(|i| day(i, 10, 4, 20)).collect();
        let h = SentimentHistory::new(rows.clone()).unwrap();
        let date = rows[59].date;
        let atm = h.features(date, MoneynessClass::Atm);
        assert_eq!(atm[1..4], [0.0, 0.0, 0.0]);
        let otm = h.features(date, MoneynessClass::Otm);
        assert_eq!(otm[..4], [0.0, 0.0, 0.0, 0.0]);
        assert_eq!(h.features(date, MoneynessClass::Itm), [0.0; 5]);
    }

    #[test]
    fn flags_are_held_during_burn_in() {
        let mut rows: Vec<_> = (0..40).map(|i| day(i, 10, 4, 20)).collect();
        rows[3] = day(3, 20, 0, 20);
        rows[35] = day(35, 20, 0, 20);
        let h = SentimentHistory::new(rows.clone()).unwrap();
        assert!(h.in_burn_in(rows[3].date));
        assert_eq!(h.features(rows[3].date, MoneynessClass::Otm)[2], 0.0);
        assert_eq!(h.features(rows[35].date, MoneynessClass::Otm)[2], 1.0);
    }

    #[test]
    fn missing_dates_carry_forward() {
        let rows = vec![day(0, 1, 0, 3), day(1, 2, 0, 3), day(5, 0, 2, 3)];
        let h = SentimentHistory::new(rows.clone()).unwrap();
        let d3 = rows[1].date + chrono::Days::new(2);
        assert_eq!(h.features(d3, MoneynessClass::Atm), h.features(rows[1].date, MoneynessClass::Atm));
    }

    #[test]
    fn rejects_inconsistent_counts() {
        assert!(SentimentHistory::new(vec![day(0, 5, 5, 6)]).is_err());
        assert!(SentimentHistory::new(vec![day(0, 1, 1, 6), day(0, 1, 1, 6)]).is_err());
    }
}
