use crate::error::{Error, Result};

/// Decay weight for half-life `h`: 1 - 2^(-1/h).
pub fn ewm_alpha(half_life: f64) -> f64 {
    1.0 - (-1.0 / half_life).exp2()
}

/// Running exponentially weighted mean and variance.
///
/// Updates are written as increments (`mean += a (x - mean)`), which keeps
/// a constant series exactly constant with exactly zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwmState {
    alpha: f64,
    mean: f64,
    var: f64,
    seen: bool,
}

impl EwmState {
    pub fn new(half_life: f64) -> Self {
        EwmState {
            alpha: ewm_alpha(half_life),
            mean: 0.0,
            var: 0.0,
            seen: false,
        }
    }

    pub fn update(&mut self, x: f64) {
        if !self.seen {
            self.mean = x;
            self.seen = true;
            return;
        }
        self.mean += self.alpha * (x - self.mean);
        let d = x - self.mean;
        self.var += self.alpha * (d * d - self.var);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.var.sqrt()
    }
}

fn check(series: &[f64], half_life: f64) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Validation("exponential smoothing of an empty series".into()));
    }
    if !(half_life > 0.0) {
        return Err(Error::Validation(format!("half-life must be positive, got {half_life}")));
    }
    Ok(())
}

pub fn ewm(series: &[f64], half_life: f64) -> Result<Vec<f64>> {
    check(series, half_life)?;
    let mut s = EwmState::new(half_life);
    Ok(series.iter().map(|&x| {
        s.update(x);
        s.mean()
    }).collect())
}

pub fn ewm_std(series: &[f64], half_life: f64) -> Result<Vec<f64>> {
    check(series, half_life)?;
    let mut s = EwmState::new(half_life);
    Ok(series.iter().map(|&x| {
        s.update(x);
        s.std()
    }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(ewm_alpha(1.0), 0.5);
        assert_eq!(ewm(&[0.0, 1.0], 1.0).unwrap(), vec![0.0, 0.5]);
        let c = [0.37; 40];
        assert!(ewm(&c, 3.0).unwrap().iter().all(|&v| v == 0.37));
        assert!(ewm_std(&c, 3.0).unwrap().iter().all(|&v| v == 0.0));
        assert!(ewm(&[], 3.0).is_err());
        assert!(ewm(&[1.0], 0.0).is_err());
    }

    #[test]
    fn variance_recursion() {
        // x = (0, 1), h = 1: mean 0.5, var = 0.5 * 0.25
        let s = ewm_std(&[0.0, 1.0], 1.0).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.125f64.sqrt()).abs() < 1e-15);
    }
}
