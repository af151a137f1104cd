use std::fmt;
use std::path::Path;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::optim::{adamw_step, clip_gradients, lr_at, AdamConfig, AdamState};
use crate::bsde::{batch_loss_and_grad, BatchSetup, LossBreakdown, LossWeights, PricingInput, TrainBatch};
use crate::error::{Error, Result};
use crate::features::{classify_moneyness, MoneynessClass};
use crate::nets::{Architecture, BackwardPlan, DropoutKey, PricingModel};
use crate::option::OptionKind;
use crate::rng;

const SAMPLE_STREAM: u64 = 0xba7c;
const PATH_STREAM: u64 = 0x9a75;

/// Optimisation settings of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Time steps per path (N).
    pub time_steps: usize,
    /// Paths per contract (M).
    pub paths: usize,
    pub peak_lr: f64,
    pub min_lr: f64,
    pub steps: usize,
    pub warmup: usize,
    pub clip: f64,
    pub weight_decay: f64,
    pub lambda: [f64; 3],
    pub omega_r: f64,
    pub omega_m: f64,
    pub eps_mape: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::pretrain()
    }
}

impl TrainConfig {
    pub fn pretrain() -> Self {
        TrainConfig {
            batch_size: 128,
            time_steps: 32,
            paths: 16,
            peak_lr: 1e-4,
            min_lr: 1e-8,
            steps: 3500,
            warmup: 1400,
            clip: 10.0,
            weight_decay: 1e-5,
            lambda: [0.8, 0.1, 0.1],
            omega_r: 1.0,
            omega_m: 1.0,
            eps_mape: 0.01,
            seed: 0,
        }
    }

    pub fn finetune() -> Self {
        TrainConfig {
            peak_lr: 1e-5,
            steps: 5000,
            warmup: 500,
            clip: 20.0,
            ..TrainConfig::pretrain()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 || self.time_steps == 0 || self.paths == 0 {
            return bad("batch size, time steps and paths must be positive".into());
        }
        if self.steps > 0 && self.warmup >= self.steps {
            return bad(format!("warmup ({}) must be below steps ({})", self.warmup, self.steps));
        }
        if !(self.min_lr >= 0.0 && self.min_lr <= self.peak_lr) {
            return bad(format!("need 0 <= min_lr <= peak_lr, got {} and {}", self.min_lr, self.peak_lr));
        }
        if !(self.clip > 0.0) || self.weight_decay < 0.0 || self.eps_mape <= 0.0 {
            return bad("clip and eps_mape must be positive and weight decay non-negative".into());
        }
        Ok(())
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        lr_at(step, self.steps, self.warmup, self.peak_lr, self.min_lr)
    }

    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            lambda: self.lambda,
            omega_r: self.omega_r,
            omega_m: self.omega_m,
            eps_mape: self.eps_mape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pretrain,
    Finetune,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Pretrain => "pretrain",
            Stage::Finetune => "finetune",
        })
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pretrain" => Ok(Stage::Pretrain),
            "finetune" => Ok(Stage::Finetune),
            other => Err(Error::Config(format!("unknown stage {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatePolicy {
    Trainable,
    FrozenZero,
    /// Sentiment path switched off entirely (gate forced to 0 in the
    /// forward pass).
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackbonePolicy {
    Trainable,
    Frozen,
}

/// What a stage trains on and which parameters move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSpec {
    pub stage: Stage,
    /// `None` mixes all classes.
    pub moneyness: Option<MoneynessClass>,
    /// `None` keeps both sides.
    pub type_filter: Option<OptionKind>,
    pub gate_policy: GatePolicy,
    pub backbone_policy: BackbonePolicy,
}

impl StageSpec {
    pub fn pretrain() -> Self {
        StageSpec {
            stage: Stage::Pretrain,
            moneyness: None,
            type_filter: None,
            gate_policy: GatePolicy::Disabled,
            backbone_policy: BackbonePolicy::Trainable,
        }
    }

    /// Fine-tuning one (class, side) bucket with a frozen backbone.
    pub fn finetune(class: MoneynessClass, kind: OptionKind) -> Self {
        StageSpec {
            stage: Stage::Finetune,
            moneyness: Some(class),
            type_filter: Some(kind),
            gate_policy: if class.gate_trainable() {
                GatePolicy::Trainable
            } else {
                GatePolicy::FrozenZero
            },
            backbone_policy: BackbonePolicy::Frozen,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.stage {
            Stage::Pretrain => {
                if self.gate_policy != GatePolicy::Disabled
                    || self.type_filter.is_some()
                    || self.moneyness.is_some()
                {
                    return Err(Error::Config(
                        "pretraining uses both sides, all classes and no sentiment".into(),
                    ));
                }
            }
            Stage::Finetune => {
                if self.moneyness == Some(MoneynessClass::Itm) && self.gate_policy != GatePolicy::FrozenZero {
                    return Err(Error::Config("the ITM gate stays frozen at 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match (self.moneyness, self.type_filter) {
            (Some(c), Some(k)) => format!("{}_{}_{}", self.stage, c.name().to_lowercase(), k.name()),
            (Some(c), None) => format!("{}_{}", self.stage, c.name().to_lowercase()),
            (None, Some(k)) => format!("{}_{}", self.stage, k.name()),
            (None, None) => self.stage.to_string(),
        }
    }

    fn stream_id(&self) -> u64 {
        let class = self.moneyness.map_or(0, |c| c as u64 + 1);
        let kind = self.type_filter.map_or(0, |k| k as u64 + 1);
        (self.stage as u64) * 100 + class * 10 + kind
    }

    pub fn accepts(&self, c: &PricingInput) -> bool {
        self.type_filter.is_none_or(|k| k == c.kind)
            && self
                .moneyness
                .is_none_or(|m| m == classify_moneyness(c.x0, c.strike, c.kind))
    }

    /// Gate value forced in the forward pass, if any.
    pub fn gate_override(&self) -> Option<f64> {
        (self.gate_policy == GatePolicy::Disabled).then_some(0.0)
    }
}

fn net_mask(arch: &Architecture, spec: &StageSpec, head: Option<&str>) -> Vec<bool> {
    let sentiment_on = spec.gate_policy == GatePolicy::Trainable;
    arch.mask_where(|name| {
        if name == "gate" || name.starts_with("sentiment.") {
            return sentiment_on;
        }
        match (spec.backbone_policy, head) {
            (BackbonePolicy::Trainable, _) | (BackbonePolicy::Frozen, None) => true,
            (BackbonePolicy::Frozen, Some(h)) => name.starts_with(&format!("head.{h}.")),
        }
    })
}

/// Trainable entries of the value and generator parameter vectors. A frozen
/// backbone freezes the value network except the head of the stage's side;
/// the generator stays trainable.
pub fn trainable_masks(model: &PricingModel, spec: &StageSpec) -> (Vec<bool>, Vec<bool>) {
    let head = spec.type_filter.map(|k| k.name());
    let value = match spec.backbone_policy {
        BackbonePolicy::Frozen => net_mask(&model.value, spec, Some(head.unwrap_or("none"))),
        BackbonePolicy::Trainable => net_mask(&model.value, spec, None),
    };
    let generator = net_mask(&model.generator, spec, None);
    (value, generator)
}

/// One optimisation step of the loss trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub stage: String,
    pub loss: LossBreakdown,
    pub lr: f64,
}

/// Weights that make a loss computed on prices divided by `scale` equal the
/// loss on the original prices: the RMSE terms grow by `scale`, MAPE is
/// unit-free once its floor is rescaled.
fn weights_in_units(w: LossWeights, scale: f64) -> LossWeights {
    LossWeights {
        lambda: [w.lambda[0], scale * w.lambda[1], scale * w.lambda[2]],
        omega_r: scale * w.omega_r,
        omega_m: w.omega_m,
        eps_mape: w.eps_mape / scale,
    }
}

/// Runs `cfg.steps` AdamW updates on the contracts accepted by `spec`.
///
/// The networks see prices in the model's `price_scale` units; the loss
/// weights are rescaled so that the optimised loss, and the trace, are in
/// the original price units.
///
/// Update `s` uses the schedule value at `s + 1`, so the first update is not
/// a zero step and the last one uses the minimum rate.
pub fn run_stage(
    spec: &StageSpec,
    cfg: &TrainConfig,
    data: &[PricingInput],
    model: &mut PricingModel,
) -> Result<Vec<TraceRow>> {
    spec.validate()?;
    cfg.validate()?;
    let scale = model.price_scale();
    let pool: Vec<PricingInput> = data
        .iter()
        .filter(|c| spec.accepts(c))
        .map(|c| c.in_units(scale))
        .collect();
    if pool.is_empty() {
        return Err(Error::Data(format!("no training contracts for stage {}", spec.name())));
    }
    if let Some(c) = pool.iter().find(|c| c.steps() != cfg.time_steps) {
        return Err(Error::Config(format!(
            "contract has {} volatility steps, config expects {}",
            c.steps(),
            cfg.time_steps
        )));
    }
    if spec.stage == Stage::Finetune {
        let gamma = spec.moneyness.map_or(0.0, |c| c.gate_init());
        let gamma = if spec.gate_policy == GatePolicy::Trainable { gamma } else { 0.0 };
        model.set_gate(gamma);
    }
    let (vmask, gmask) = trainable_masks(model, spec);
    let mask: Vec<bool> = vmask.iter().chain(&gmask).copied().collect();
    let mut setup = BatchSetup {
        weights: weights_in_units(cfg.loss_weights(), scale),
        value_plan: BackwardPlan::from_mask(&model.value, &vmask),
        generator_plan: BackwardPlan::from_mask(&model.generator, &gmask),
        gate: spec.gate_override(),
        dropout: None,
    };
    let adam = AdamConfig::default();
    let mut state = AdamState::new(model.n_params());
    let id = spec.stream_id();
    let mut trace = Vec::with_capacity(cfg.steps);
    let mut params = model.params();
    info!(
        "stage {}: {} contracts, {} trainable of {} parameters",
        spec.name(),
        pool.len(),
        mask.iter().filter(|&&m| m).count(),
        mask.len()
    );
    for s in 0..cfg.steps {
        let mut r = rng::stream(cfg.seed, &[SAMPLE_STREAM, id, s as u64]);
        let inputs: Vec<PricingInput> = (0..cfg.batch_size)
            .map(|_| pool[rng::index(&mut r, pool.len())].clone())
            .collect();
        let batch = TrainBatch::simulate(inputs, cfg.paths, cfg.seed, &[PATH_STREAM, id, s as u64])?;
        setup.dropout = Some(DropoutKey { seed: cfg.seed, call: id * 1_000_000 + s as u64 });
        let out = batch_loss_and_grad(model, &batch, &setup).map_err(|e| match e {
            Error::Numerical(m) => Error::Numerical(format!("stage {}, step {s}: {m}", spec.name())),
            other => other,
        })?;
        let mut grads: Vec<f64> = out.value.into_iter().chain(out.generator).collect();
        grads.iter_mut().zip(&mask).for_each(|(g, &m)| if !m { *g = 0.0 });
        let norm = clip_gradients(&mut grads, cfg.clip);
        let lr = cfg.lr_at(s + 1);
        adamw_step(&mut params, &grads, &mask, &mut state, lr, cfg.weight_decay, &adam)
            .map_err(|e| Error::Numerical(format!("stage {}, step {s}: {e}", spec.name())))?;
        model.set_params(&params);
        let loss = LossBreakdown {
            terminal: scale * out.loss.terminal,
            path: scale * out.loss.path,
            weights: cfg.loss_weights(),
            ..out.loss
        };
        if s % 100 == 0 || s + 1 == cfg.steps {
            debug!(
                "{} step {s}: total {:.4} price {:.4} terminal {:.4} path {:.4} |g| {norm:.3e} lr {lr:.3e}",
                spec.name(),
                loss.total,
                loss.price,
                loss.terminal,
                loss.path
            );
        }
        trace.push(TraceRow { step: s, stage: spec.name(), loss, lr });
    }
    Ok(trace)
}

/// Columns: step, stage, loss_total, loss_price, loss_terminal, loss_path, lr.
pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    crate::fsutil::ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "stage", "loss_total", "loss_price", "loss_terminal", "loss_path", "lr"])?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            r.stage.clone(),
            format!("{:e}", r.loss.total),
            format!("{:e}", r.loss.price),
            format!("{:e}", r.loss.terminal),
            format!("{:e}", r.loss.path),
            format!("{:e}", r.lr),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsde::{loss_price, total_loss};

    #[test]
    fn rescaled_weights_reproduce_the_raw_loss() {
        let u = [101.0, 48.0, 0.3, 7.5];
        let y = [100.0, 50.0, 0.25, 8.0];
        let w = TrainConfig::pretrain().loss_weights();
        let s = 10.0;
        let raw = total_loss(loss_price(&u, &y, &w).unwrap(), 3.0, 2.0, w);
        let us: Vec<f64> = u.iter().map(|v| v / s).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / s).collect();
        let ws = weights_in_units(w, s);
        let scaled = total_loss(loss_price(&us, &ys, &ws).unwrap(), 3.0 / s, 2.0 / s, ws);
        assert!((scaled.price - raw.price).abs() < 1e-12 * raw.price);
        assert!((scaled.total - raw.total).abs() < 1e-12 * raw.total);
        assert_eq!(weights_in_units(w, 1.0), w);
    }
}
