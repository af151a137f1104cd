//! Error metrics, per-bucket reports and prediction export.

mod metrics;
mod report;

pub use metrics::{ape, extreme_error_shares, metrics, Metrics, EXTREME_THRESHOLDS};
pub use report::{
    report_by_bucket, write_extreme, write_predictions, write_report, BucketReport, OVERALL,
};
