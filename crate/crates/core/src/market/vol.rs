use crate::error::{Error, Result};

/// Trading days per year, used for both annualisation and maturities.
pub const TRADING_DAYS: f64 = 252.0;

pub fn years_from_days(days: u32) -> f64 {
    days as f64 / TRADING_DAYS
}

/// Daily realized variance and its annualised volatility from intraday log
/// returns.
pub fn realized_vol(returns: &[f64]) -> Result<(f64, f64)> {
    if returns.is_empty() {
        return Err(Error::Validation("realized volatility needs at least one return".into()));
    }
    let rv: f64 = returns.iter().map(|r| r * r).sum();
    Ok((rv, rv.sqrt() * TRADING_DAYS.sqrt()))
}

/// Forecast annualised volatility for each remaining trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct VolTrajectory {
    daily_sigma: Vec<f64>,
}

impl VolTrajectory {
    pub fn new(daily_sigma: Vec<f64>) -> Result<Self> {
        if daily_sigma.is_empty() {
            return Err(Error::Validation("volatility trajectory is empty".into()));
        }
        if let Some(s) = daily_sigma.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::Validation(format!("invalid volatility {s} in trajectory")));
        }
        Ok(VolTrajectory { daily_sigma })
    }

    pub fn constant(sigma: f64, days: usize) -> Result<Self> {
        VolTrajectory::new(vec![sigma; days.max(1)])
    }

    pub fn days(&self) -> usize {
        self.daily_sigma.len()
    }

    pub fn daily(&self) -> &[f64] {
        &self.daily_sigma
    }

    /// Piecewise-constant per-step volatilities for an `n`-step grid.
    pub fn align(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.daily_sigma[align_index(i, self.days(), n)])
            .collect()
    }
}

/// Day index used by step `i` of an `n`-step grid over `d` days.
pub fn align_index(i: usize, d: usize, n: usize) -> usize {
    ((i * d) / n).min(d - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realized_vol_examples() {
        let (rv, s) = realized_vol(&[0.01, -0.02]).unwrap();
        assert!((rv - 0.0005).abs() < 1e-18);
        assert!((s - 0.354_965).abs() < 1e-6);
        assert_eq!(realized_vol(&[0.0, 0.0]).unwrap(), (0.0, 0.0));
        assert!(realized_vol(&[]).is_err());
        let daily = (0.2f64 * 0.2 / 252.0).sqrt();
        let (_, s) = realized_vol(&[daily]).unwrap();
        assert!((s - 0.2).abs() < 1e-15);
    }

    #[test]
    fn alignment_examples() {
        assert_eq!(align_index(16, 10, 32), 5);
        assert_eq!(align_index(31, 10, 32), 9);
        for i in 0..32 {
            assert_eq!(align_index(i, 1, 32), 0);
        }
        let t = VolTrajectory::new((0..10).map(|d| d as f64 / 100.0).collect()).unwrap();
        let steps = t.align(32);
        assert_eq!(steps.len(), 32);
        assert_eq!(steps[16], 0.05);
        assert_eq!(steps[31], 0.09);
    }

    #[test]
    fn trajectory_validation() {
        assert!(VolTrajectory::new(vec![]).is_err());
        assert!(VolTrajectory::new(vec![0.1, -0.1]).is_err());
        assert!(VolTrajectory::new(vec![f64::NAN]).is_err());
    }
}
