use crate::special::{BasisJet, N_BASIS};

/// Norm floor for adaptive-activation weights.
pub const AAF_NORM_FLOOR: f64 = 1e-6;

/// Initial mixing weights.
pub const AAF_INIT: [f64; N_BASIS] = [0.2; N_BASIS];

/// Mixing weights `(a, b, c, d, e)` for sin, tanh, GELU, SiLU and Softplus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AafWeights(pub [f64; N_BASIS]);

impl Default for AafWeights {
    fn default() -> Self {
        AafWeights(AAF_INIT)
    }
}

impl AafWeights {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Unit-norm weights used by the forward pass.
    pub fn normalized(&self) -> [f64; N_BASIS] {
        let n = self.norm().max(AAF_NORM_FLOOR);
        self.0.map(|w| w / n)
    }

    /// Rescales in place so the norm is at least [`AAF_NORM_FLOOR`].
    /// All-zero weights restart from the equal mix.
    pub fn enforce_floor(w: &mut [f64]) {
        let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n >= AAF_NORM_FLOOR {
            return;
        }
        if n == 0.0 {
            let e = AAF_NORM_FLOOR / (N_BASIS as f64).sqrt();
            w.iter_mut().for_each(|v| *v = e);
        } else {
            let s = AAF_NORM_FLOOR / n;
            w.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// Adaptive activation: `(a sin x + b tanh x + c GELU x + d SiLU x + e Softplus x) / ||w||`.
pub fn aaf(x: f64, w: &AafWeights) -> f64 {
    let n = w.norm().max(AAF_NORM_FLOOR);
    let f = BasisJet::values(x);
    w.0.iter().zip(f).map(|(wi, fi)| wi * fi).sum::<f64>() / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_at_zero() {
        let y = aaf(0.0, &AafWeights::default());
        let expected = 0.2 * std::f64::consts::LN_2 / 0.2f64.sqrt();
        assert!((y - expected).abs() < 1e-15);
        assert!((y - 0.309_985).abs() < 1e-6);
    }

    #[test]
    fn single_basis_selects_sin() {
        let y = aaf(1.0, &AafWeights([1.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(y, 1f64.sin());
        assert!((y - 0.841_471).abs() < 1e-6);
    }

    #[test]
    fn scale_invariance() {
        let w = AafWeights([0.3, -0.1, 0.7, 0.05, 0.2]);
        for &x in &[-2.0, -0.3, 0.0, 0.9, 4.0] {
            let base = aaf(x, &w);
            // powers of two rescale exactly
            assert_eq!(aaf(x, &AafWeights(w.0.map(|v| v * 4.0))), base);
            let tripled = aaf(x, &AafWeights(w.0.map(|v| v * 3.0)));
            assert!((tripled - base).abs() <= 4.0 * f64::EPSILON * base.abs().max(1.0));
        }
    }

    #[test]
    fn floor_rescues_collapsed_weights() {
        let mut w = [1e-9, 0.0, 0.0, 0.0, 0.0];
        AafWeights::enforce_floor(&mut w);
        assert!((AafWeights(w).norm() - AAF_NORM_FLOOR).abs() < 1e-18);
        let mut z = [0.0; 5];
        AafWeights::enforce_floor(&mut z);
        assert!((AafWeights(z).norm() - AAF_NORM_FLOOR).abs() < 1e-18);
    }
}
