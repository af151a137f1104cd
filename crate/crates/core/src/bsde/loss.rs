use crate::error::{Error, Result};
use crate::option::OptionKind;

/// Loss weights: λ for (price, terminal, path), ω for (RMSE, MAPE).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda: [f64; 3],
    pub omega_r: f64,
    pub omega_m: f64,
    /// Floor on |label| in the MAPE denominator.
    pub eps_mape: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda: [0.8, 0.1, 0.1],
            omega_r: 1.0,
            omega_m: 1.0,
            eps_mape: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub price: f64,
    pub terminal: f64,
    pub path: f64,
    pub total: f64,
    pub weights: LossWeights,
}

pub(crate) fn rmse(diffs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for d in diffs {
        s += d * d;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// ω_r RMSE + ω_m MAPE, with MAPE as a fraction.
pub fn loss_price(u0: &[f64], labels: &[f64], w: &LossWeights) -> Result<f64> {
    if u0.len() != labels.len() {
        return Err(Error::Validation(format!(
            "price loss: {} predictions for {} labels",
            u0.len(),
            labels.len()
        )));
    }
    if u0.is_empty() {
        return Ok(0.0);
    }
    let r = rmse(u0.iter().zip(labels).map(|(u, y)| u - y));
    let mape = u0
        .iter()
        .zip(labels)
        .map(|(u, y)| (u - y).abs() / y.abs().max(w.eps_mape))
        .sum::<f64>()
        / u0.len() as f64;
    Ok(w.omega_r * r + w.omega_m * mape)
}

/// RMSE of terminal values against the payoff.
pub fn loss_terminal(u_tau: &[f64], x_tau: &[f64], strike: f64, kind: OptionKind) -> f64 {
    rmse(u_tau.iter().zip(x_tau).map(|(&u, &x)| u - kind.payoff(x, strike)))
}

/// RMSE over all (step, path) cells of the first N steps.
pub fn loss_path(u_path: &[Vec<f64>], y_path: &[Vec<f64>]) -> Result<f64> {
    if u_path.len() != y_path.len() || u_path.iter().zip(y_path).any(|(u, y)| u.len() != y.len()) {
        return Err(Error::Validation("path loss: shape mismatch".into()));
    }
    Ok(rmse(
        u_path.iter().zip(y_path).flat_map(|(u, y)| u.iter().zip(y).map(|(a, b)| a - b)),
    ))
}

pub fn total_loss(price: f64, terminal: f64, path: f64, weights: LossWeights) -> LossBreakdown {
    let [l1, l2, l3] = weights.lambda;
    LossBreakdown {
        price,
        terminal,
        path,
        total: l1 * price + l2 * terminal + l3 * path,
        weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_examples() {
        let w = LossWeights::default();
        assert_eq!(loss_price(&[3.0, 4.0], &[3.0, 4.0], &w).unwrap(), 0.0);
        assert_eq!(loss_price(&[10.0], &[8.0], &w).unwrap(), 2.25);
        let only_mape = LossWeights { omega_r: 0.0, ..w };
        assert_eq!(loss_price(&[0.005], &[0.0], &only_mape).unwrap(), 0.5);
        assert!(loss_price(&[1.0], &[1.0, 2.0], &w).is_err());
    }

    #[test]
    fn terminal_examples() {
        assert_eq!(OptionKind::Call.payoff(4100.0, 4000.0), 100.0);
        assert_eq!(OptionKind::Put.payoff(4100.0, 4000.0), 0.0);
        assert_eq!(loss_terminal(&[100.0, 0.0], &[4100.0, 3900.0], 4000.0, OptionKind::Call), 0.0);
    }

    #[test]
    fn path_examples() {
        let u = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(loss_path(&u, &u).unwrap(), 0.0);
        let y: Vec<Vec<f64>> = u.iter().map(|r| r.iter().map(|v| v - 0.5).collect()).collect();
        assert_eq!(loss_path(&u, &y).unwrap(), 0.5);
        assert!(loss_path(&u, &y[..1]).is_err());
    }

    #[test]
    fn total_examples() {
        let w = LossWeights::default();
        assert!((total_loss(1.0, 2.0, 3.0, w).total - 1.3).abs() < 1e-15);
        assert_eq!(total_loss(0.0, 0.0, 0.0, w).total, 0.0);
        let w1 = LossWeights { lambda: [1.0, 0.0, 0.0], ..w };
        assert_eq!(total_loss(0.7, 2.0, 3.0, w1).total, 0.7);
    }
}
