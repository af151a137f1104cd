use std::cell::RefCell;

use gprice::autodiff::{directional_value_and_grad, Dual, Op, Scalar, Tape, TapeDual, Var};
use proptest::prelude::*;

fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-3)
}

/// Reverse-mode derivative of a one-argument function.
fn tape_grad(f: impl for<'t> Fn(Var<'t>) -> Var<'t>, x: f64) -> (f64, f64) {
    let tape = RefCell::new(Tape::new());
    let v = Var::input(&tape, x);
    let y = f(v);
    let g = tape.borrow().backward(y.id);
    (y.value(), g.get(v.id))
}

macro_rules! unary_oracle {
    ($name:ident, $method:ident, $lo:expr, $hi:expr) => {
        proptest! {
            #[test]
            fn $name(x in $lo..$hi) {
                let (y, g) = tape_grad(|v| v.$method(), x);
                prop_assert!(close(y, x.$method(), 1e-15));
                let d = Dual { primal: x, tangent: 1.0 }.$method();
                prop_assert!(close(g, d.tangent, 1e-12), "tape {} vs dual {}", g, d.tangent);
                prop_assert!(close(g, fd(|x| x.$method(), x), 1e-6), "tape {} vs fd", g);
            }
        }
    };
}

unary_oracle!(exp_matches_fd, exp, -5.0f64, 5.0);
unary_oracle!(ln_matches_fd, ln, 0.05f64, 50.0);
unary_oracle!(sin_matches_fd, sin, -6.0f64, 6.0);
unary_oracle!(cos_matches_fd, cos, -6.0f64, 6.0);
unary_oracle!(tanh_matches_fd, tanh, -4.0f64, 4.0);
unary_oracle!(gelu_matches_fd, gelu, -6.0f64, 6.0);
unary_oracle!(silu_matches_fd, silu, -8.0f64, 8.0);
unary_oracle!(softplus_matches_fd, softplus, -20.0f64, 20.0);
unary_oracle!(sigmoid_matches_fd, sigmoid, -20.0f64, 20.0);
unary_oracle!(sqrt_matches_fd, sqrt, 0.05f64, 50.0);
unary_oracle!(pow2_matches_fd, pow2, -10.0f64, 10.0);
unary_oracle!(normcdf_matches_fd, normcdf, -6.0f64, 6.0);

proptest! {
    #[test]
    fn binary_ops_match_fd(a in -5.0f64..5.0, b in 0.3f64..5.0) {
        type F = fn(f64, f64) -> f64;
        let cases: [(F, for<'t> fn(Var<'t>, Var<'t>) -> Var<'t>); 5] = [
            (|a, b| a + b, |a, b| a + b),
            (|a, b| a - b, |a, b| a - b),
            (|a, b| a * b, |a, b| a * b),
            (|a, b| a / b, |a, b| a / b),
            (|a, b| a.max(b), |a, b| Scalar::max(a, b)),
        ];
        for (f, g) in cases {
            if (a - b).abs() < 1e-3 {
                continue;
            }
            let tape = RefCell::new(Tape::new());
            let (va, vb) = (Var::input(&tape, a), Var::input(&tape, b));
            let y = g(va, vb);
            let gr = tape.borrow().backward(y.id);
            prop_assert_eq!(y.value(), f(a, b));
            prop_assert!(close(gr.get(va.id), fd(|x| f(x, b), a), 1e-6));
            prop_assert!(close(gr.get(vb.id), fd(|x| f(a, x), b), 1e-6));
        }
    }

    #[test]
    fn reused_node_accumulates(x in -3.0f64..3.0) {
        // f = x sin x + exp(x) x
        let (_, g) = tape_grad(|v| v * v.sin() + v.exp() * v, x);
        let want = x.sin() + x * x.cos() + x.exp() * (1.0 + x);
        prop_assert!(close(g, want, 1e-12));
    }
}

#[test]
fn record_checks_arity() {
    let mut t = Tape::new();
    let a = t.input(1.0);
    assert!(t.record(Op::Add, &[a]).is_err());
    assert!(t.record(Op::Exp, &[a, a]).is_err());
    assert!(t.record(Op::Exp, &[a]).is_ok());
}

#[test]
fn tanh_plus_sin_worked_example() {
    let (_, g) = tape_grad(|v| v.tanh() + v.sin(), 0.3);
    let want = fd(|x| x.tanh() + x.sin(), 0.3);
    assert!(close(g, want, 1e-6));
}

/// f(w, x) = tanh(w0 x + w1) * w2; check d/dw of df/dx.
#[test]
fn second_order_through_the_tangent() {
    let w = [0.7, -0.2, 1.3];
    let x = 0.4;
    let tape = RefCell::new(Tape::new());
    let inputs: Vec<Var> = w.iter().chain([&x]).map(|&v| Var::input(&tape, v)).collect();
    let (y, dy) = directional_value_and_grad(&inputs, &[0.0, 0.0, 0.0, 1.0], |d: &[TapeDual]| {
        (d[0] * d[3] + d[1]).tanh() * d[2]
    });
    let g = tape.borrow().backward(dy.id);

    let dfdx = |w: &[f64]| {
        let t = (w[0] * x + w[1]).tanh();
        w[2] * w[0] * (1.0 - t * t)
    };
    assert!((y.value() - (w[0] * x + w[1]).tanh() * w[2]).abs() < 1e-15);
    assert!((dy.value() - dfdx(&w)).abs() < 1e-14);
    for i in 0..3 {
        let mut wp = w;
        let mut wm = w;
        wp[i] += 1e-5;
        wm[i] -= 1e-5;
        let num = (dfdx(&wp) - dfdx(&wm)) / 2e-5;
        assert!(close(g.get(inputs[i].id), num, 1e-6), "w{i}");
    }
}
