//! Row-at-a-time forward pass, generic over the scalar type so it can run
//! on the recording tape. Used to cross-check the batched engine.

use super::arch::{Architecture, SENTIMENT_DIM};
use crate::autodiff::Scalar;
use crate::special::N_BASIS;

fn aaf<S: Scalar>(x: S, w: &[S]) -> S {
    let zero = x.lift(0.0);
    let norm = w.iter().fold(zero, |acc, &v| acc + v * v).sqrt();
    let basis = [x.sin(), x.tanh(), x.gelu(), x.silu(), x.softplus()];
    let num = basis.iter().zip(w).fold(zero, |acc, (&f, &wk)| acc + wk * f);
    num / norm
}

impl Architecture {
    /// Deterministic (no dropout) forward pass of a single row.
    pub fn forward_row<S: Scalar>(
        &self,
        p: &[S],
        channels: &[S],
        sentiment: &[S; SENTIMENT_DIM],
        head: usize,
    ) -> S {
        assert_eq!(p.len(), self.n_params());
        assert_eq!(channels.len(), self.channels());
        let e = self.config.expansion_width;
        let zero = p[0].lift(0.0);
        let mut h = Vec::with_capacity(self.input_width());
        for (ch, &x) in channels.iter().enumerate() {
            for j in 0..e {
                h.push(p[self.exp_w + ch * e + j] * x + p[self.exp_b + ch * e + j]);
            }
        }
        let gate = p[self.gate];
        for j in 0..e {
            let mut acc = p[self.sent_b + j];
            for (k, &ek) in sentiment.iter().enumerate() {
                acc = acc + p[self.sent_w + j * SENTIMENT_DIM + k] * ek;
            }
            h.push(gate * acc);
        }
        for layer in &self.layers {
            let w = &p[layer.aaf..layer.aaf + N_BASIS];
            h = (0..layer.fan_out)
                .map(|o| {
                    let row = &p[layer.w + o * layer.fan_in..layer.w + (o + 1) * layer.fan_in];
                    let z = row.iter().zip(&h).fold(p[layer.b + o], |acc, (&w, &x)| acc + w * x);
                    aaf(z, w)
                })
                .collect();
        }
        let (wo, bo) = self.heads[head];
        h.iter()
            .enumerate()
            .fold(zero, |acc, (j, &a)| acc + p[wo + j] * a)
            + p[bo]
    }
}
