use ndarray::Array2;

use crate::error::{Error, Result};
use crate::rng;

/// Simulated price paths with the Brownian increments that drove them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    /// M x (N+1) prices.
    pub x: Array2<f64>,
    /// M x N increments, each N(0, dt).
    pub dw: Array2<f64>,
    pub dt: f64,
    pub sigma_steps: Vec<f64>,
}

impl PathBatch {
    pub fn paths(&self) -> usize {
        self.x.nrows()
    }

    pub fn steps(&self) -> usize {
        self.sigma_steps.len()
    }
}

/// Exact GBM stepping from given increments.
pub fn paths_from_increments(
    x0: f64,
    r: f64,
    sigma_steps: &[f64],
    dt: f64,
    dw: Array2<f64>,
) -> Result<PathBatch> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::Validation(format!("initial price must be positive, got {x0}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Validation(format!("time step must be positive, got {dt}")));
    }
    let (m, n) = dw.dim();
    if n != sigma_steps.len() {
        return Err(Error::Validation("increment columns differ from step count".into()));
    }
    let drift: Vec<f64> = sigma_steps.iter().map(|s| (r - 0.5 * s * s) * dt).collect();
    let mut x = Array2::zeros((m, n + 1));
    for j in 0..m {
        let mut v = x0;
        x[[j, 0]] = v;
        for i in 0..n {
            v *= (drift[i] + sigma_steps[i] * dw[[j, i]]).exp();
            x[[j, i + 1]] = v;
        }
    }
    Ok(PathBatch {
        x,
        dw,
        dt,
        sigma_steps: sigma_steps.to_vec(),
    })
}

/// Simulates `m` paths. Path `j` draws its increments from the substream
/// `(seed, key.., j)`, so any subset of paths can be regenerated alone.
pub fn simulate_paths(
    x0: f64,
    r: f64,
    sigma_steps: &[f64],
    dt: f64,
    m: usize,
    seed: u64,
    key: &[u64],
) -> Result<PathBatch> {
    let n = sigma_steps.len();
    let sqrt_dt = dt.sqrt();
    let mut dw = Array2::zeros((m, n));
    let mut keys = key.to_vec();
    keys.push(0);
    for j in 0..m {
        *keys.last_mut().expect("nonempty") = j as u64;
        let mut s = rng::stream(seed, &keys);
        for i in 0..n {
            dw[[j, i]] = sqrt_dt * rng::standard_normal(&mut s);
        }
    }
    paths_from_increments(x0, r, sigma_steps, dt, dw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vol_is_flat() {
        let b = simulate_paths(4000.0, 0.0, &[0.0; 8], 0.01, 5, 1, &[]).unwrap();
        assert!(b.x.iter().all(|&v| v == 4000.0));
    }

    #[test]
    fn drift_only_step() {
        let dt = 1.0 / 252.0;
        let b = paths_from_increments(1.0, 0.0, &[0.2], dt, Array2::zeros((1, 1))).unwrap();
        let expected = (-7.936_508e-5f64).exp();
        assert!((b.x[[0, 1]] - expected).abs() < 1e-12);
        assert_eq!(b.x[[0, 1]], (-0.5 * 0.2 * 0.2 * dt).exp());
    }

    #[test]
    fn paths_are_positive_and_seeded() {
        let sig = vec![0.8; 16];
        let a = simulate_paths(100.0, 0.0, &sig, 0.1, 50, 9, &[3]).unwrap();
        assert!(a.x.iter().all(|&v| v > 0.0));
        assert_eq!(a, simulate_paths(100.0, 0.0, &sig, 0.1, 50, 9, &[3]).unwrap());
        let b = simulate_paths(100.0, 0.0, &sig, 0.1, 10, 9, &[3]).unwrap();
        assert_eq!(a.dw.row(7), b.dw.row(7));
        let c = simulate_paths(100.0, 0.0, &sig, 0.1, 10, 9, &[4]).unwrap();
        assert_ne!(c.dw.row(0), b.dw.row(0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(simulate_paths(0.0, 0.0, &[0.2], 0.1, 1, 0, &[]).is_err());
        assert!(simulate_paths(1.0, 0.0, &[0.2], 0.0, 1, 0, &[]).is_err());
    }
}
