use std::ops::{Add, Div, Mul, Neg, Sub};

/// Forward-mode dual number: a value and its directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub primal: f64,
    pub tangent: f64,
}

impl Dual {
    pub fn new(primal: f64, tangent: f64) -> Self {
        Dual { primal, tangent }
    }

    pub fn constant(primal: f64) -> Self {
        Dual::new(primal, 0.0)
    }

    pub fn variable(primal: f64) -> Self {
        Dual::new(primal, 1.0)
    }

    /// Applies a scalar function with known derivative.
    #[inline]
    pub fn chain(self, value: f64, derivative: f64) -> Self {
        Dual::new(value, derivative * self.tangent)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.primal + o.primal, self.tangent + o.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.primal - o.primal, self.tangent - o.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(
            self.primal * o.primal,
            self.tangent * o.primal + self.primal * o.tangent,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.primal / o.primal;
        Dual::new(q, (self.tangent - q * o.tangent) / o.primal)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.primal, -self.tangent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let a = Dual::new(2.0, 0.5);
        let b = Dual::new(3.0, -1.0);
        let p = a * b;
        assert_eq!(p.primal, 6.0);
        assert_eq!(p.tangent, 0.5 * 3.0 + 2.0 * -1.0);
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::variable(2.0);
        let q = Dual::constant(1.0) / x;
        assert_eq!(q.primal, 0.5);
        assert_eq!(q.tangent, -0.25);
    }
}
