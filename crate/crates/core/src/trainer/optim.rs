use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Linear warmup from 0 to `peak`, then cosine decay to `min` at `steps`.
pub fn lr_at(step: usize, steps: usize, warmup: usize, peak: f64, min: f64) -> f64 {
    if step < warmup {
        return peak * step as f64 / warmup as f64;
    }
    if steps <= warmup {
        return min;
    }
    let progress = ((step - warmup) as f64 / (steps - warmup) as f64).min(1.0);
    min + 0.5 * (peak - min) * (1.0 + (PI * progress).cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One AdamW update with decoupled weight decay. Entries with `mask[i]`
/// false are left untouched, moments included.
pub fn adamw_step(
    params: &mut [f64],
    grads: &[f64],
    mask: &[bool],
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
    cfg: &AdamConfig,
) -> Result<()> {
    let n = params.len();
    if grads.len() != n || mask.len() != n || state.m.len() != n {
        return Err(Error::Validation("optimizer shapes do not match".into()));
    }
    if let Some(i) = (0..n).find(|&i| mask[i] && !grads[i].is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite gradient {} at parameter {i}; step rejected",
            grads[i]
        )));
    }
    state.t += 1;
    let bc1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(state.t as i32);
    for i in 0..n {
        if !mask[i] {
            continue;
        }
        let g = grads[i];
        params[i] -= lr * weight_decay * params[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

/// Global-norm clipping; returns the norm before clipping.
pub fn clip_gradients(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
    norm
}
