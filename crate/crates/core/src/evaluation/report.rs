use std::path::Path;

use serde::Serialize;

use super::metrics::{ape, extreme_error_shares, metrics, Metrics, EXTREME_THRESHOLDS};
use crate::error::{Error, Result};
use crate::features::{MoneynessClass, OptionContract};
use crate::fsutil::ensure_parent;
use crate::option::OptionKind;

/// Bucket name of the row aggregating every contract.
pub const OVERALL: &str = "overall";

/// Metrics of one moneyness × side bucket, or of the whole set.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketReport {
    /// `atm_call`, `itm_put`, ... or [`OVERALL`].
    pub bucket: String,
    pub n: usize,
    /// `None` for an empty bucket.
    pub metrics: Option<Metrics>,
    /// Shares above [`EXTREME_THRESHOLDS`]; empty for an empty bucket.
    pub extreme: Vec<f64>,
}

fn bucket_name(class: MoneynessClass, kind: OptionKind) -> String {
    format!("{}_{}", class.name().to_ascii_lowercase(), kind.name())
}

fn summarise(bucket: String, y: &[f64], y_hat: &[f64]) -> Result<BucketReport> {
    if y.is_empty() {
        return Ok(BucketReport { bucket, n: 0, metrics: None, extreme: Vec::new() });
    }
    Ok(BucketReport {
        n: y.len(),
        metrics: Some(metrics(y, y_hat)?),
        extreme: extreme_error_shares(y, y_hat, &EXTREME_THRESHOLDS)?,
        bucket,
    })
}

/// One report per (moneyness, side) bucket in a fixed order, then the
/// overall report computed directly on all rows.
pub fn report_by_bucket(contracts: &[OptionContract], predictions: &[f64]) -> Result<Vec<BucketReport>> {
    if contracts.len() != predictions.len() {
        return Err(Error::Validation(format!(
            "{} contracts but {} predictions",
            contracts.len(),
            predictions.len()
        )));
    }
    let mut out = Vec::with_capacity(7);
    for class in MoneynessClass::ALL {
        for kind in [OptionKind::Call, OptionKind::Put] {
            let (y, p): (Vec<f64>, Vec<f64>) = contracts
                .iter()
                .zip(predictions)
                .filter(|(c, _)| c.kind == kind && c.class() == class)
                .map(|(c, &p)| (c.label, p))
                .unzip();
            out.push(summarise(bucket_name(class, kind), &y, &p)?);
        }
    }
    let y: Vec<f64> = contracts.iter().map(|c| c.label).collect();
    out.push(summarise(OVERALL.into(), &y, predictions)?);
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Columns: bucket, n, mae, rmse, mape, r2. Empty cells mark absent values.
pub fn write_report(path: &Path, reports: &[BucketReport]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bucket", "n", "mae", "rmse", "mape", "r2"])?;
    for r in reports {
        let m = r.metrics;
        w.write_record([
            r.bucket.clone(),
            r.n.to_string(),
            opt(m.map(|m| m.mae)),
            opt(m.map(|m| m.rmse)),
            opt(m.map(|m| m.mape)),
            opt(m.and_then(|m| m.r2)),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Columns: bucket, n, share_gt_50, share_gt_100, share_gt_200.
pub fn write_extreme(path: &Path, reports: &[BucketReport]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bucket", "n", "share_gt_50", "share_gt_100", "share_gt_200"])?;
    for r in reports {
        let mut row = vec![r.bucket.clone(), r.n.to_string()];
        row.extend((0..EXTREME_THRESHOLDS.len()).map(|i| opt(r.extreme.get(i).copied())));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct PredictionRecord<'a> {
    date: String,
    #[serde(rename = "type")]
    kind: &'a str,
    strike: f64,
    underlying: f64,
    tau_days: u32,
    settlement: f64,
    bucket: String,
    prediction: f64,
    ape: f64,
}

/// The contract columns of `options.csv` followed by bucket, prediction
/// and APE (percent).
pub fn write_predictions(path: &Path, contracts: &[OptionContract], predictions: &[f64]) -> Result<()> {
    if contracts.len() != predictions.len() {
        return Err(Error::Validation(format!(
            "{} contracts but {} predictions",
            contracts.len(),
            predictions.len()
        )));
    }
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    for (c, &p) in contracts.iter().zip(predictions) {
        w.serialize(PredictionRecord {
            date: c.date.format("%Y-%m-%d").to_string(),
            kind: c.kind.code(),
            strike: c.strike,
            underlying: c.underlying,
            tau_days: c.tau_days,
            settlement: c.label,
            bucket: bucket_name(c.class(), c.kind),
            prediction: p,
            ape: ape(c.label, p),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
