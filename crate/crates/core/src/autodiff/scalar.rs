use std::ops::{Add, Div, Mul, Neg, Sub};

use super::dual::Dual;
use super::tape::{Op, TapeDual, Var};
use crate::special;

/// Numeric type that model code can be written against once and evaluated
/// with plain floats, forward duals, tape variables or tape duals.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant living in the same context as `self` (same tape).
    fn lift(&self, v: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn gelu(self) -> Self;
    fn silu(self) -> Self;
    fn softplus(self) -> Self;
    fn sigmoid(self) -> Self;
    fn sqrt(self) -> Self;
    fn pow2(self) -> Self;
    fn normcdf(self) -> Self;
    fn max(self, other: Self) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, v: f64) -> f64 {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn tanh(self) -> f64 {
        f64::tanh(self)
    }
    fn gelu(self) -> f64 {
        special::gelu(self)
    }
    fn silu(self) -> f64 {
        special::silu(self)
    }
    fn softplus(self) -> f64 {
        special::softplus(self)
    }
    fn sigmoid(self) -> f64 {
        special::sigmoid(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn pow2(self) -> f64 {
        self * self
    }
    fn normcdf(self) -> f64 {
        special::normal_cdf(self)
    }
    fn max(self, other: f64) -> f64 {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Scalar for Dual {
    fn lift(&self, v: f64) -> Dual {
        Dual::constant(v)
    }
    fn value(&self) -> f64 {
        self.primal
    }
    fn exp(self) -> Dual {
        let y = self.primal.exp();
        self.chain(y, y)
    }
    fn ln(self) -> Dual {
        self.chain(self.primal.ln(), 1.0 / self.primal)
    }
    fn sin(self) -> Dual {
        let (s, c) = self.primal.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Dual {
        let (s, c) = self.primal.sin_cos();
        self.chain(c, -s)
    }
    fn tanh(self) -> Dual {
        let y = self.primal.tanh();
        self.chain(y, 1.0 - y * y)
    }
    fn gelu(self) -> Dual {
        let x = self.primal;
        let cdf = special::normal_cdf(x);
        self.chain(x * cdf, cdf + x * special::normal_pdf(x))
    }
    fn silu(self) -> Dual {
        let x = self.primal;
        let s = special::sigmoid(x);
        self.chain(x * s, s + x * s * (1.0 - s))
    }
    fn softplus(self) -> Dual {
        self.chain(special::softplus(self.primal), special::sigmoid(self.primal))
    }
    fn sigmoid(self) -> Dual {
        let s = special::sigmoid(self.primal);
        self.chain(s, s * (1.0 - s))
    }
    fn sqrt(self) -> Dual {
        let y = self.primal.sqrt();
        self.chain(y, 0.5 / y)
    }
    fn pow2(self) -> Dual {
        self.chain(self.primal * self.primal, 2.0 * self.primal)
    }
    fn normcdf(self) -> Dual {
        self.chain(
            special::normal_cdf(self.primal),
            special::normal_pdf(self.primal),
        )
    }
    fn max(self, other: Dual) -> Dual {
        if self.primal >= other.primal {
            self
        } else {
            other
        }
    }
}

macro_rules! var_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl<'t> $trait for Var<'t> {
            type Output = Var<'t>;
            fn $method(self, o: Var<'t>) -> Var<'t> {
                self.binary($op, o)
            }
        }
    };
}

var_binop!(Add, add, Op::Add);
var_binop!(Sub, sub, Op::Sub);
var_binop!(Mul, mul, Op::Mul);
var_binop!(Div, div, Op::Div);

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(Op::Neg)
    }
}

impl<'t> Scalar for Var<'t> {
    fn lift(&self, v: f64) -> Var<'t> {
        Var::constant(self.tape, v)
    }
    fn value(&self) -> f64 {
        Var::value(self)
    }
    fn exp(self) -> Self {
        self.unary(Op::Exp)
    }
    fn ln(self) -> Self {
        self.unary(Op::Ln)
    }
    fn sin(self) -> Self {
        self.unary(Op::Sin)
    }
    fn cos(self) -> Self {
        self.unary(Op::Cos)
    }
    fn tanh(self) -> Self {
        self.unary(Op::Tanh)
    }
    fn gelu(self) -> Self {
        self.unary(Op::Gelu)
    }
    fn silu(self) -> Self {
        self.unary(Op::Silu)
    }
    fn softplus(self) -> Self {
        self.unary(Op::Softplus)
    }
    fn sigmoid(self) -> Self {
        self.unary(Op::Sigmoid)
    }
    fn sqrt(self) -> Self {
        self.unary(Op::Sqrt)
    }
    fn pow2(self) -> Self {
        self.unary(Op::Pow2)
    }
    fn normcdf(self) -> Self {
        self.unary(Op::NormCdf)
    }
    fn max(self, other: Self) -> Self {
        self.binary(Op::Max, other)
    }
}

impl<'t> TapeDual<'t> {
    fn chain(self, value: Var<'t>, derivative: Var<'t>) -> Self {
        TapeDual {
            primal: value,
            tangent: derivative * self.tangent,
        }
    }
}

impl<'t> Add for TapeDual<'t> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        TapeDual {
            primal: self.primal + o.primal,
            tangent: self.tangent + o.tangent,
        }
    }
}

impl<'t> Sub for TapeDual<'t> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        TapeDual {
            primal: self.primal - o.primal,
            tangent: self.tangent - o.tangent,
        }
    }
}

impl<'t> Mul for TapeDual<'t> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        TapeDual {
            primal: self.primal * o.primal,
            tangent: self.tangent * o.primal + self.primal * o.tangent,
        }
    }
}

impl<'t> Div for TapeDual<'t> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.primal / o.primal;
        TapeDual {
            primal: q,
            tangent: (self.tangent - q * o.tangent) / o.primal,
        }
    }
}

impl<'t> Neg for TapeDual<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        TapeDual {
            primal: -self.primal,
            tangent: -self.tangent,
        }
    }
}

impl<'t> Scalar for TapeDual<'t> {
    fn lift(&self, v: f64) -> Self {
        TapeDual {
            primal: self.primal.lift(v),
            tangent: self.primal.lift(0.0),
        }
    }
    fn value(&self) -> f64 {
        self.primal.value()
    }
    fn exp(self) -> Self {
        let y = self.primal.exp();
        self.chain(y, y)
    }
    fn ln(self) -> Self {
        let one = self.primal.lift(1.0);
        self.chain(self.primal.ln(), one / self.primal)
    }
    fn sin(self) -> Self {
        self.chain(self.primal.sin(), self.primal.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.primal.cos(), -self.primal.sin())
    }
    fn tanh(self) -> Self {
        let y = self.primal.tanh();
        let one = self.primal.lift(1.0);
        self.chain(y, one - y.pow2())
    }
    fn gelu(self) -> Self {
        let x = self.primal;
        let d = x.normcdf() + x * x.normal_pdf();
        self.chain(x.gelu(), d)
    }
    fn silu(self) -> Self {
        let x = self.primal;
        let s = x.sigmoid();
        let one = x.lift(1.0);
        self.chain(x.silu(), s + x * s * (one - s))
    }
    fn softplus(self) -> Self {
        self.chain(self.primal.softplus(), self.primal.sigmoid())
    }
    fn sigmoid(self) -> Self {
        let s = self.primal.sigmoid();
        let one = s.lift(1.0);
        self.chain(s, s * (one - s))
    }
    fn sqrt(self) -> Self {
        let y = self.primal.sqrt();
        let half = y.lift(0.5);
        self.chain(y, half / y)
    }
    fn pow2(self) -> Self {
        let two = self.primal.lift(2.0);
        self.chain(self.primal.pow2(), two * self.primal)
    }
    fn normcdf(self) -> Self {
        self.chain(self.primal.normcdf(), self.primal.normal_pdf())
    }
    fn max(self, other: Self) -> Self {
        if self.primal.value() >= other.primal.value() {
            TapeDual {
                primal: self.primal.max(other.primal),
                tangent: self.tangent,
            }
        } else {
            TapeDual {
                primal: self.primal.max(other.primal),
                tangent: other.tangent,
            }
        }
    }
}
