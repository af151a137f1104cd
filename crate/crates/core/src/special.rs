//! Scalar special functions shared by the pricer, the activation layers and
//! the autodiff primitives.

use libm::erfc;
use statrs::function::erf::erfc_inv;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF via the complementary error function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse standard normal CDF. `p` must lie in the open interval (0, 1).
#[inline]
pub fn normal_inv_cdf(p: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Newton step against the more accurate forward CDF
    let d = normal_pdf(x);
    if d > 0.0 {
        x - (normal_cdf(x) - p) / d
    } else {
        x
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Exact GELU, `x * Phi(x)`.
#[inline]
pub fn gelu(x: f64) -> f64 {
    x * normal_cdf(x)
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

/// Number of basis functions mixed by an adaptive activation.
pub const N_BASIS: usize = 5;

/// Values and first two derivatives of the five activation bases
/// (sin, tanh, GELU, SiLU, Softplus) at one point.
#[derive(Debug, Clone, Copy)]
pub struct BasisJet {
    pub f: [f64; N_BASIS],
    pub d1: [f64; N_BASIS],
    pub d2: [f64; N_BASIS],
}

/// Sigmoid and softplus from a single `exp(-|x|)`.
#[inline]
fn sigmoid_softplus(x: f64) -> (f64, f64) {
    let e = (-x.abs()).exp();
    let r = 1.0 / (1.0 + e);
    let sg = if x >= 0.0 { r } else { e * r };
    (sg, x.max(0.0) + e.ln_1p())
}

impl BasisJet {
    #[inline]
    pub fn at(x: f64) -> Self {
        let (s, c) = x.sin_cos();
        let th = x.tanh();
        let cdf = normal_cdf(x);
        let pdf = normal_pdf(x);
        let (sg, sp) = sigmoid_softplus(x);
        let sg1 = sg * (1.0 - sg);
        let th1 = 1.0 - th * th;
        BasisJet {
            f: [s, th, x * cdf, x * sg, sp],
            d1: [c, th1, cdf + x * pdf, sg + x * sg1, sg],
            d2: [
                -s,
                -2.0 * th * th1,
                pdf * (2.0 - x * x),
                sg1 * (2.0 + x * (1.0 - 2.0 * sg)),
                sg1,
            ],
        }
    }

    /// Values and first derivatives only.
    #[inline]
    pub fn first_order(x: f64) -> ([f64; N_BASIS], [f64; N_BASIS]) {
        let (s, c) = x.sin_cos();
        let th = x.tanh();
        let cdf = normal_cdf(x);
        let pdf = normal_pdf(x);
        let (sg, sp) = sigmoid_softplus(x);
        (
            [s, th, x * cdf, x * sg, sp],
            [c, 1.0 - th * th, cdf + x * pdf, sg + x * sg * (1.0 - sg), sg],
        )
    }

    #[inline]
    pub fn values(x: f64) -> [f64; N_BASIS] {
        let (sg, sp) = sigmoid_softplus(x);
        [x.sin(), x.tanh(), gelu(x), x * sg, sp]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // Phi(1.96) to 15 digits
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-14);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_78e-16).abs() < 1e-27);
    }

    #[test]
    fn inverse_cdf_round_trips() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let x = normal_inv_cdf(p);
            assert!((normal_cdf(x) - p).abs() < 1e-12 * p.max(1e-3), "p={p}");
        }
    }

    #[test]
    fn basis_derivatives_match_finite_differences() {
        let h = 1e-5;
        for &x in &[-3.1, -0.7, 0.0, 0.4, 2.2, 6.0] {
            let j = BasisJet::at(x);
            let fp = BasisJet::values(x + h);
            let fm = BasisJet::values(x - h);
            let jp = BasisJet::at(x + h);
            let jm = BasisJet::at(x - h);
            for k in 0..N_BASIS {
                let d1 = (fp[k] - fm[k]) / (2.0 * h);
                assert!((d1 - j.d1[k]).abs() < 1e-8, "d1 basis {k} at {x}");
                let d2 = (jp.d1[k] - jm.d1[k]) / (2.0 * h);
                assert!((d2 - j.d2[k]).abs() < 1e-8, "d2 basis {k} at {x}");
            }
        }
    }

    #[test]
    fn softplus_is_stable_in_the_tails() {
        assert_eq!(softplus(-800.0), 0.0);
        assert_eq!(softplus(800.0), 800.0);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-16);
    }
}
