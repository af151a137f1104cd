//! Batched loss and gradient of the recursion over many contracts.
//!
//! Rows at steps 1..N are laid out contract-major (`b * M + j`). Step 0 is
//! path independent and is evaluated once per contract. The reverse sweep
//! recomputes each step's forward pass instead of holding all of them, so
//! memory stays at a few steps' worth of activations.

use super::input::PricingInput;
use super::loss::{loss_price, rmse, total_loss, LossBreakdown, LossWeights};
use super::models::{push_generator_row, push_value_row};
use super::recurse::check_finite;
use crate::error::{Error, Result};
use crate::market::{simulate_paths, PathBatch};
use crate::nets::{
    generator_channel as gc, value_channel as vc, Architecture, BackwardPlan, DropoutKey,
    Forward, ForwardOptions, NetInputs, PricingModel,
};

/// Contracts with their simulated paths; all share N and M.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainBatch {
    pub inputs: Vec<PricingInput>,
    pub paths: Vec<PathBatch>,
}

impl TrainBatch {
    /// Contract `b` draws its paths from the substream `(seed, key.., b)`.
    pub fn simulate(inputs: Vec<PricingInput>, m: usize, seed: u64, key: &[u64]) -> Result<Self> {
        let mut keys = key.to_vec();
        keys.push(0);
        let paths = inputs
            .iter()
            .enumerate()
            .map(|(b, c)| {
                *keys.last_mut().expect("nonempty") = b as u64;
                simulate_paths(c.x0, c.rate, &c.sigma_steps, c.dt(), m, seed, &keys)
            })
            .collect::<Result<Vec<_>>>()?;
        TrainBatch::new(inputs, paths)
    }

    pub fn new(inputs: Vec<PricingInput>, paths: Vec<PathBatch>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != paths.len() {
            return Err(Error::Validation("batch needs one path set per contract".into()));
        }
        let (n, m) = (paths[0].steps(), paths[0].paths());
        for (c, p) in inputs.iter().zip(&paths) {
            if c.steps() != n || p.steps() != n || p.paths() != m || m == 0 {
                return Err(Error::Validation("batch contracts disagree on the time grid".into()));
            }
        }
        Ok(TrainBatch { inputs, paths })
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.inputs.len(), self.paths[0].steps(), self.paths[0].paths())
    }
}

/// Loss configuration for one gradient evaluation.
#[derive(Debug, Clone)]
pub struct BatchSetup {
    pub weights: LossWeights,
    pub value_plan: BackwardPlan,
    pub generator_plan: BackwardPlan,
    /// Gate override applied to both networks (sentiment disabled when 0).
    pub gate: Option<f64>,
    /// Training-mode dropout for the value network.
    pub dropout: Option<DropoutKey>,
}

#[derive(Debug, Clone)]
pub struct BatchGrad {
    pub loss: LossBreakdown,
    pub value: Vec<f64>,
    pub generator: Vec<f64>,
}

struct Ctx<'a> {
    model: &'a PricingModel,
    batch: &'a TrainBatch,
    setup: &'a BatchSetup,
}

impl Ctx<'_> {
    fn dropout(&self, step: usize) -> Option<DropoutKey> {
        self.setup.dropout.map(|k| DropoutKey {
            seed: k.seed,
            call: (k.call << 12) | step as u64,
        })
    }

    /// Value network at step `i` (i = N is the terminal evaluation).
    fn value_step(&self, i: usize, tangent: bool) -> Result<Forward> {
        let (b, n, m) = self.batch.dims();
        let arch = &self.model.value;
        let mut inp;
        if i == 0 {
            inp = NetInputs::with_rows(arch.channels(), b);
            for c in &self.batch.inputs {
                push_value_row(&mut inp, c, 0.0, c.x0, c.sigma_steps[0]);
            }
        } else {
            inp = NetInputs::with_rows(arch.channels(), b * m);
            for (c, p) in self.batch.inputs.iter().zip(&self.batch.paths) {
                let (t, sigma) = if i == n {
                    (c.tau, c.terminal_sigma())
                } else {
                    (i as f64 * p.dt, c.sigma_steps[i])
                };
                for j in 0..m {
                    push_value_row(&mut inp, c, t, p.x[[j, i]], sigma);
                }
            }
        }
        let opts = ForwardOptions {
            tangent_channel: tangent.then_some(vc::X),
            dropout: self.dropout(i),
            gate: self.setup.gate,
        };
        arch.forward(&self.model.value_params, inp, &opts)
    }

    fn generator_step(&self, i: usize, y: &[f64], z: &[f64]) -> Result<Forward> {
        let (b, _, m) = self.batch.dims();
        let arch = &self.model.generator;
        let rows = if i == 0 { b } else { b * m };
        let mut inp = NetInputs::with_rows(arch.channels(), rows);
        for (bi, (c, p)) in self.batch.inputs.iter().zip(&self.batch.paths).enumerate() {
            let t = i as f64 * p.dt;
            let sigma = c.sigma_steps[i];
            if i == 0 {
                push_generator_row(&mut inp, c, t, c.x0, y[bi], z[bi], sigma);
            } else {
                for j in 0..m {
                    let r = bi * m + j;
                    push_generator_row(&mut inp, c, t, p.x[[j, i]], y[r], z[r], sigma);
                }
            }
        }
        let opts = ForwardOptions {
            gate: self.setup.gate,
            ..Default::default()
        };
        arch.forward(&self.model.generator_params, inp, &opts)
    }
}

/// Prices from the value network at t = 0 (inference mode), in the
/// currency of `inputs`.
pub fn predict_prices(
    arch: &Architecture,
    params: &[f64],
    inputs: &[PricingInput],
    gate: Option<f64>,
) -> Result<Vec<f64>> {
    let scale = arch.config.price_scale;
    let mut inp = NetInputs::with_rows(arch.channels(), inputs.len());
    for c in inputs {
        push_value_row(&mut inp, &c.in_units(scale), 0.0, c.x0 / scale, c.sigma_steps[0]);
    }
    let opts = ForwardOptions { gate, ..Default::default() };
    let mut out = arch.forward(params, inp, &opts)?.output;
    out.iter_mut().for_each(|y| *y *= scale);
    Ok(out)
}

/// Total loss of the batch and its gradient with respect to the parameters
/// selected by the setup's plans.
pub fn batch_loss_and_grad(
    model: &PricingModel,
    batch: &TrainBatch,
    setup: &BatchSetup,
) -> Result<BatchGrad> {
    let ctx = Ctx { model, batch, setup };
    let (nb, n, m) = batch.dims();
    if n >= 1 << 12 {
        return Err(Error::Config("at most 4095 time steps are supported".into()));
    }
    let rows = nb * m;
    let w = setup.weights;

    // Forward sweep. y[i], z[i], u[i] hold step i (per contract at i = 0).
    let f0 = ctx.value_step(0, true)?;
    let u0 = f0.output.clone();
    let d0 = f0.tangent.clone().expect("tangent");
    check_finite(&u0, "initial value", 0)?;
    drop(f0);
    let z0: Vec<f64> = batch
        .inputs
        .iter()
        .enumerate()
        .map(|(b, c)| c.sigma_steps[0] * c.x0 * d0[b])
        .collect();
    let g0 = ctx.generator_step(0, &u0, &z0)?.output;
    let mut ys: Vec<Vec<f64>> = vec![u0.clone()];
    let mut zs: Vec<Vec<f64>> = vec![z0.clone()];
    let mut us: Vec<Vec<f64>> = vec![u0.clone()];
    let mut y = vec![0.0; rows];
    for (b, p) in batch.paths.iter().enumerate() {
        for j in 0..m {
            y[b * m + j] = u0[b] - g0[b] * p.dt + z0[b] * p.dw[[j, 0]];
        }
    }
    check_finite(&y, "Y", 1)?;
    for i in 1..n {
        let f = ctx.value_step(i, true)?;
        let d = f.tangent.as_ref().expect("tangent");
        let mut z = vec![0.0; rows];
        for (b, (c, p)) in batch.inputs.iter().zip(&batch.paths).enumerate() {
            for j in 0..m {
                let r = b * m + j;
                z[r] = c.sigma_steps[i] * p.x[[j, i]] * d[r];
            }
        }
        let g = ctx.generator_step(i, &y, &z)?.output;
        let mut next = y.clone();
        for (b, p) in batch.paths.iter().enumerate() {
            for j in 0..m {
                let r = b * m + j;
                next[r] += -g[r] * p.dt + z[r] * p.dw[[j, i]];
            }
        }
        check_finite(&next, "Y", i + 1)?;
        us.push(f.output);
        ys.push(std::mem::replace(&mut y, next));
        zs.push(z);
    }
    let fterm = ctx.value_step(n, false)?;

    // Losses.
    let labels: Vec<f64> = batch.inputs.iter().map(|c| c.label).collect();
    let price = loss_price(&u0, &labels, &w)?;
    let term_diff: Vec<f64> = batch
        .inputs
        .iter()
        .zip(&batch.paths)
        .flat_map(|(c, p)| (0..m).map(move |j| (c, p.x[[j, n]])))
        .zip(&fterm.output)
        .map(|((c, x), u)| u - c.kind.payoff(x, c.strike))
        .collect();
    let terminal = rmse(term_diff.iter().copied());
    // step 0 contributes nb * m zero cells
    let path_sq: f64 = (1..n)
        .map(|i| us[i].iter().zip(&ys[i]).map(|(u, y)| (u - y) * (u - y)).sum::<f64>())
        .sum();
    let path_cells = (n * rows) as f64;
    let path = (path_sq / path_cells).sqrt();
    let loss = total_loss(price, terminal, path, w);
    if !loss.total.is_finite() {
        return Err(Error::Numerical(format!("non-finite loss {loss:?}")));
    }

    // Reverse sweep.
    let mut gv = vec![0.0; model.value.n_params()];
    let mut gg = vec![0.0; model.generator.n_params()];
    let vplan = &setup.value_plan;
    let gplan = setup.generator_plan.clone().with_input_channels(&[gc::Y, gc::Z]);
    let s_term = if terminal > 0.0 { w.lambda[1] / (rows as f64 * terminal) } else { 0.0 };
    let s_path = if path > 0.0 { w.lambda[2] / (path_cells * path) } else { 0.0 };

    let term_bar: Vec<f64> = term_diff.iter().map(|d| s_term * d).collect();
    model.value.backward(&model.value_params, &fterm, &term_bar, None, vplan, &mut gv);
    drop(fterm);

    let mut y_bar = vec![0.0; rows];
    for i in (1..n).rev() {
        let fg = ctx.generator_step(i, &ys[i], &zs[i])?;
        let mut g_bar = vec![0.0; rows];
        for (b, p) in batch.paths.iter().enumerate() {
            for j in 0..m {
                g_bar[b * m + j] = -p.dt * y_bar[b * m + j];
            }
        }
        let ig = model.generator.backward(&model.generator_params, &fg, &g_bar, None, &gplan, &mut gg);
        drop(fg);
        let yg = ig.channels[gc::Y].as_ref().expect("requested");
        let zg = ig.channels[gc::Z].as_ref().expect("requested");
        let mut u_bar = vec![0.0; rows];
        let mut d_bar = vec![0.0; rows];
        for (b, (c, p)) in batch.inputs.iter().zip(&batch.paths).enumerate() {
            for j in 0..m {
                let r = b * m + j;
                let z_bar = p.dw[[j, i]] * y_bar[r] + zg[r];
                u_bar[r] = s_path * (us[i][r] - ys[i][r]);
                d_bar[r] = c.sigma_steps[i] * p.x[[j, i]] * z_bar;
                y_bar[r] += yg[r] - u_bar[r];
            }
        }
        let fv = ctx.value_step(i, true)?;
        model.value.backward(&model.value_params, &fv, &u_bar, Some(&d_bar), vplan, &mut gv);
    }

    // Step 0: fold the path adjoints back onto the per-contract rows.
    let mut g0_bar = vec![0.0; nb];
    let mut z0_bar = vec![0.0; nb];
    let mut y0_bar = vec![0.0; nb];
    for (b, p) in batch.paths.iter().enumerate() {
        for j in 0..m {
            let yb = y_bar[b * m + j];
            g0_bar[b] -= p.dt * yb;
            z0_bar[b] += p.dw[[j, 0]] * yb;
            y0_bar[b] += yb;
        }
    }
    let fg = ctx.generator_step(0, &u0, &z0)?;
    let ig = model.generator.backward(&model.generator_params, &fg, &g0_bar, None, &gplan, &mut gg);
    drop(fg);
    let yg = ig.channels[gc::Y].as_ref().expect("requested");
    let zg = ig.channels[gc::Z].as_ref().expect("requested");
    let price_bar = price_adjoint(&u0, &labels, &w);
    let mut u0_bar = vec![0.0; nb];
    let mut d0_bar = vec![0.0; nb];
    for (b, c) in batch.inputs.iter().enumerate() {
        u0_bar[b] = y0_bar[b] + yg[b] + w.lambda[0] * price_bar[b];
        d0_bar[b] = c.sigma_steps[0] * c.x0 * (z0_bar[b] + zg[b]);
    }
    let f0 = ctx.value_step(0, true)?;
    model.value.backward(&model.value_params, &f0, &u0_bar, Some(&d0_bar), vplan, &mut gv);

    Ok(BatchGrad { loss, value: gv, generator: gg })
}

/// d(price loss)/d(u0).
fn price_adjoint(u0: &[f64], labels: &[f64], w: &LossWeights) -> Vec<f64> {
    let nb = u0.len() as f64;
    let r = rmse(u0.iter().zip(labels).map(|(u, y)| u - y));
    u0.iter()
        .zip(labels)
        .map(|(&u, &y)| {
            let d = u - y;
            let rm = if r > 0.0 { w.omega_r * d / (nb * r) } else { 0.0 };
            let sign = if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
            rm + w.omega_m * sign / (nb * y.abs().max(w.eps_mape))
        })
        .collect()
}
