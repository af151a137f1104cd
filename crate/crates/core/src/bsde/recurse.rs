use ndarray::Array2;

use super::input::PricingInput;
use super::models::{GeneratorModel, ValueModel};
use crate::error::{Error, Result};
use crate::market::PathBatch;

/// Trajectories of one contract's recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionState {
    /// Y at maturity, per path.
    pub y: Vec<f64>,
    /// Z at the last step, per path.
    pub z: Vec<f64>,
    /// (N+1) x M value evaluations; row N is the terminal evaluation.
    pub u_path: Array2<f64>,
    /// N x M recursion values for steps 0..N-1.
    pub y_path: Array2<f64>,
}

pub(crate) fn check_finite(values: &[f64], what: &str, step: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(j) => Err(Error::Numerical(format!(
            "non-finite {what} at step {step}, path {j}: {}",
            values[j]
        ))),
    }
}

/// Runs Y_{i+1} = Y_i - g_i Δt + Z_i ΔW_{i+1} from Y_0 = u(0, X_0).
pub fn recurse<V: ValueModel, G: GeneratorModel>(
    value: &V,
    generator: &G,
    batch: &PathBatch,
    c: &PricingInput,
) -> Result<RecursionState> {
    let n = batch.steps();
    let m = batch.paths();
    if n != c.steps() || (batch.dt - c.dt()).abs() > 1e-12 * c.dt() {
        return Err(Error::Validation("path batch does not match the contract grid".into()));
    }
    let dt = batch.dt;
    let mut u_path = Array2::zeros((n + 1, m));
    let mut y_path = Array2::zeros((n, m));
    // inputs at t = 0 are path independent
    let (u0, d0) = value.value(c, 0.0, c.sigma_steps[0], &[c.x0])?;
    check_finite(&u0, "initial value", 0)?;
    let mut y = vec![u0[0]; m];
    let mut z = vec![0.0; m];
    for i in 0..n {
        let x: Vec<f64> = batch.x.column(i).to_vec();
        let sigma = c.sigma_steps[i];
        let t = i as f64 * dt;
        let (u, d) = if i == 0 {
            (vec![u0[0]; m], vec![d0[0]; m])
        } else {
            value.value(c, t, sigma, &x)?
        };
        for j in 0..m {
            z[j] = sigma * x[j] * d[j];
        }
        let g = generator.generator(c, t, sigma, &x, &y, &z)?;
        u_path.row_mut(i).assign(&ndarray::ArrayView1::from(&u));
        y_path.row_mut(i).assign(&ndarray::ArrayView1::from(&y));
        for j in 0..m {
            y[j] += -g[j] * dt + z[j] * batch.dw[[j, i]];
        }
        check_finite(&y, "Y", i + 1)?;
    }
    let xn: Vec<f64> = batch.x.column(n).to_vec();
    let (un, _) = value.value(c, c.tau, c.terminal_sigma(), &xn)?;
    u_path.row_mut(n).assign(&ndarray::ArrayView1::from(&un));
    Ok(RecursionState { y, z, u_path, y_path })
}
