use crate::error::{Error, Result};

/// APE thresholds in percent for the extreme-error table.
pub const EXTREME_THRESHOLDS: [f64; 3] = [50.0, 100.0, 200.0];

/// Point-error summary of one set of predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    /// Percent.
    pub mape: f64,
    /// `None` when the labels have zero variance.
    pub r2: Option<f64>,
}

fn check(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.is_empty() || y.len() != y_hat.len() {
        return Err(Error::Validation(format!(
            "need equal non-empty label and prediction vectors, got {} and {}",
            y.len(),
            y_hat.len()
        )));
    }
    if let Some(i) = y.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::Validation(format!("label {i} is {} (must be positive)", y[i])));
    }
    if let Some(i) = y_hat.iter().position(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("prediction {i} is not finite")));
    }
    Ok(())
}

/// Absolute percentage error of one prediction. No floor on the label.
#[inline]
pub fn ape(y: f64, y_hat: f64) -> f64 {
    100.0 * (y - y_hat).abs() / y
}

pub fn metrics(y: &[f64], y_hat: &[f64]) -> Result<Metrics> {
    check(y, y_hat)?;
    let n = y.len() as f64;
    let mut abs = 0.0;
    let mut sq = 0.0;
    let mut pct = 0.0;
    for (&a, &b) in y.iter().zip(y_hat) {
        abs += (a - b).abs();
        sq += (a - b) * (a - b);
        pct += ape(a, b);
    }
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(Metrics {
        n: y.len(),
        mae: abs / n,
        rmse: (sq / n).sqrt(),
        mape: pct / n,
        r2: (ss_tot > 0.0).then(|| 1.0 - sq / ss_tot),
    })
}

/// Share of samples whose APE is strictly above each threshold (percent).
pub fn extreme_error_shares(y: &[f64], y_hat: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    check(y, y_hat)?;
    let apes: Vec<f64> = y.iter().zip(y_hat).map(|(&a, &b)| ape(a, b)).collect();
    let n = apes.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| apes.iter().filter(|&&e| e > t).count() as f64 / n)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_predictions() {
        let y = [1.0, 2.5, 7.0];
        let m = metrics(&y, &y).unwrap();
        assert_eq!((m.mae, m.rmse, m.mape, m.r2), (0.0, 0.0, 0.0, Some(1.0)));
        assert_eq!(extreme_error_shares(&y, &y, &EXTREME_THRESHOLDS).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn hand_computed() {
        let m = metrics(&[2.0, 4.0], &[1.0, 5.0]).unwrap();
        assert_eq!((m.mae, m.rmse, m.mape), (1.0, 1.0, 37.5));

        let m = metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((m.mae - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.rmse - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((m.mape - (100.0 + 100.0 / 3.0) / 3.0).abs() < 1e-12);
        assert_eq!(m.r2, Some(0.0));
    }

    #[test]
    fn constant_labels_have_no_r2() {
        assert_eq!(metrics(&[3.0, 3.0], &[2.0, 4.0]).unwrap().r2, None);
    }

    #[test]
    fn extreme_boundary_is_strict() {
        let y = [1.0; 5];
        let p = [3.0, 1.0, 1.0, 1.0, 1.0];
        assert_eq!(extreme_error_shares(&y, &p, &EXTREME_THRESHOLDS).unwrap(), vec![0.2, 0.2, 0.0]);
        let y = [0.5, 2.0, 10.0];
        let p: Vec<f64> = y.iter().map(|v| 1.6 * v).collect();
        assert_eq!(extreme_error_shares(&y, &p, &EXTREME_THRESHOLDS).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(metrics(&[0.0], &[1.0]).is_err());
        assert!(metrics(&[1.0], &[f64::NAN]).is_err());
    }
}
