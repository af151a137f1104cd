//! Batched evaluation of an [`Architecture`] with an optional forward tangent
//! along one input channel, and the matching reverse pass.
//!
//! Rows `0..B` of every activation matrix hold primal values. When a tangent
//! channel is requested, rows `B..2B` hold the tangents, so one GEMM per layer
//! propagates both. The reverse pass differentiates the primal output and the
//! tangent output together (forward-over-reverse): an adjoint on the tangent
//! reaches the parameters through second derivatives of the activations.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use super::aaf::{AafWeights, AAF_NORM_FLOOR};
use super::arch::{Architecture, SENTIMENT_DIM};
use super::SentimentVector;
use crate::error::{Error, Result};
use crate::rng;
use crate::special::{BasisJet, N_BASIS};

/// Column-oriented batch of network inputs.
#[derive(Debug, Clone, Default)]
pub struct NetInputs {
    /// One vector per input channel, each of length `rows`.
    pub channels: Vec<Vec<f64>>,
    pub sentiment: Vec<[f64; SENTIMENT_DIM]>,
    /// Output head per row.
    pub heads: Vec<usize>,
    /// Replaces the gated sentiment block `gate * (W e + b)` row by row.
    pub gated_sentiment: Option<Array2<f64>>,
}

impl NetInputs {
    pub fn with_rows(channels: usize, rows: usize) -> Self {
        NetInputs {
            channels: vec![Vec::with_capacity(rows); channels],
            sentiment: Vec::with_capacity(rows),
            heads: Vec::with_capacity(rows),
            gated_sentiment: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.heads.len()
    }

    fn validate(&self, arch: &Architecture) -> Result<()> {
        let b = self.rows();
        if self.channels.len() != arch.channels() {
            return Err(Error::Validation(format!(
                "{} network expects {} input channels, got {}",
                arch.kind.name(),
                arch.channels(),
                self.channels.len()
            )));
        }
        if self.channels.iter().any(|c| c.len() != b) || self.sentiment.len() != b {
            return Err(Error::Validation("input columns differ in length".into()));
        }
        if let Some(h) = self.heads.iter().find(|&&h| h >= arch.heads.len()) {
            return Err(Error::Validation(format!("head index {h} out of range")));
        }
        for (c, col) in self.channels.iter().enumerate() {
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "non-finite value {} in input channel {c}, row {r}",
                    col[r]
                )));
            }
        }
        if self.sentiment.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite sentiment feature".into()));
        }
        if let Some(g) = &self.gated_sentiment {
            if g.dim() != (b, arch.config.expansion_width) {
                return Err(Error::Validation("gated sentiment block has wrong shape".into()));
            }
        }
        Ok(())
    }
}

/// Dropout stream identity: masks for layer `l` come from
/// `stream(seed, [call, l])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropoutKey {
    pub seed: u64,
    pub call: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ForwardOptions {
    /// Channel whose unit direction drives the tangent output.
    pub tangent_channel: Option<usize>,
    /// Training-mode dropout; `None` evaluates deterministically.
    pub dropout: Option<DropoutKey>,
    /// Overrides the gate parameter (inference-time ablation).
    pub gate: Option<f64>,
}

struct Cache {
    rows: usize,
    tangent_channel: Option<usize>,
    gate: f64,
    gate_from_params: bool,
    inputs: NetInputs,
    z: Vec<Array2<f64>>,
    /// Post-activation (post-dropout) output of each layer.
    acts: Vec<Array2<f64>>,
    masks: Vec<Option<Vec<bool>>>,
    keep_scale: f64,
}

/// Result of a batched forward pass, retaining what the reverse pass needs.
pub struct Forward {
    pub output: Vec<f64>,
    /// Directional derivative of each output along the tangent channel.
    pub tangent: Option<Vec<f64>>,
    cache: Cache,
}

impl Forward {
    pub fn inputs(&self) -> &NetInputs {
        &self.cache.inputs
    }
}

/// Which gradients a reverse pass must produce.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardPlan {
    pub expansion: bool,
    pub sentiment: bool,
    pub gate: bool,
    /// (weights and bias, activation weights) per dense layer.
    pub layers: Vec<(bool, bool)>,
    pub heads: Vec<bool>,
    /// Input channels whose gradients are returned.
    pub input_channels: Vec<usize>,
    /// Return the gradient with respect to the gated sentiment block.
    pub gated_block: bool,
}

impl BackwardPlan {
    pub fn all(arch: &Architecture) -> Self {
        BackwardPlan {
            expansion: true,
            sentiment: true,
            gate: true,
            layers: vec![(true, true); arch.layers.len()],
            heads: vec![true; arch.heads.len()],
            input_channels: Vec::new(),
            gated_block: false,
        }
    }

    pub fn none(arch: &Architecture) -> Self {
        BackwardPlan {
            expansion: false,
            sentiment: false,
            gate: false,
            layers: vec![(false, false); arch.layers.len()],
            heads: vec![false; arch.heads.len()],
            input_channels: Vec::new(),
            gated_block: false,
        }
    }

    /// Gradients for every segment with at least one trainable entry.
    pub fn from_mask(arch: &Architecture, mask: &[bool]) -> Self {
        let any = |name: &str| {
            arch.segment(name)
                .map(|s| mask[s.range()].iter().any(|&m| m))
                .unwrap_or(false)
        };
        BackwardPlan {
            expansion: any("expansion.weight") || any("expansion.bias"),
            sentiment: any("sentiment.weight") || any("sentiment.bias"),
            gate: any("gate"),
            layers: (0..arch.layers.len())
                .map(|i| {
                    (
                        any(&format!("backbone.{i}.weight")) || any(&format!("backbone.{i}.bias")),
                        any(&format!("aaf.{i}")),
                    )
                })
                .collect(),
            heads: arch
                .kind
                .head_names()
                .iter()
                .map(|h| any(&format!("head.{h}.weight")) || any(&format!("head.{h}.bias")))
                .collect(),
            input_channels: Vec::new(),
            gated_block: false,
        }
    }

    pub fn with_input_channels(mut self, channels: &[usize]) -> Self {
        self.input_channels = channels.to_vec();
        self
    }

    pub fn with_gated_block(mut self) -> Self {
        self.gated_block = true;
        self
    }

    fn needs_input_adjoint(&self) -> bool {
        self.expansion
            || self.sentiment
            || self.gate
            || self.gated_block
            || !self.input_channels.is_empty()
    }

    /// Whether the adjoint of layer `l`'s pre-activation is needed.
    fn needs_layer_adjoint(&self, l: usize) -> bool {
        self.needs_input_adjoint() || self.layers[..=l].iter().any(|&(w, a)| w || a)
    }

    pub fn is_empty(&self) -> bool {
        !self.needs_input_adjoint()
            && !self.heads.iter().any(|&h| h)
            && !self.layers.iter().any(|&(w, a)| w || a)
    }
}

/// Gradients with respect to network inputs.
#[derive(Debug, Clone, Default)]
pub struct InputGrads {
    pub channels: Vec<Option<Vec<f64>>>,
    pub gated_block: Option<Array2<f64>>,
}

#[inline]
fn dot5(a: &[f64; N_BASIS], b: &[f64; N_BASIS]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] + a[4] * b[4]
}

impl Architecture {
    fn weight_view<'a>(&self, p: &'a [f64], l: usize) -> ArrayView2<'a, f64> {
        let layer = self.layers[l];
        let n = layer.fan_in * layer.fan_out;
        ArrayView2::from_shape((layer.fan_out, layer.fan_in), &p[layer.w..layer.w + n])
            .expect("layout")
    }

    fn aaf_weights(&self, p: &[f64], l: usize) -> ([f64; N_BASIS], f64) {
        let a = self.layers[l].aaf;
        let w = AafWeights([p[a], p[a + 1], p[a + 2], p[a + 3], p[a + 4]]);
        (w.normalized(), w.norm().max(AAF_NORM_FLOOR))
    }

    /// Concatenated expansion + gated sentiment input, stacked with its
    /// tangent rows when a tangent channel is active.
    fn input_layer(
        &self,
        p: &[f64],
        inputs: &NetInputs,
        gate: f64,
        tangent: Option<usize>,
    ) -> Array2<f64> {
        let b = inputs.rows();
        let e = self.config.expansion_width;
        let c = self.channels();
        let width = self.input_width();
        let stacked = if tangent.is_some() { 2 * b } else { b };
        let mut h = Array2::<f64>::zeros((stacked, width));
        let hs = h.as_slice_mut().expect("standard layout");
        let exp_w = &p[self.exp_w..self.exp_w + c * e];
        let exp_b = &p[self.exp_b..self.exp_b + c * e];
        let sent_w = &p[self.sent_w..self.sent_w + e * SENTIMENT_DIM];
        let sent_b = &p[self.sent_b..self.sent_b + e];
        for r in 0..b {
            let row = &mut hs[r * width..(r + 1) * width];
            for ch in 0..c {
                let x = inputs.channels[ch][r];
                let (w, bias) = (&exp_w[ch * e..(ch + 1) * e], &exp_b[ch * e..(ch + 1) * e]);
                for ((out, &wj), &bj) in row[ch * e..(ch + 1) * e].iter_mut().zip(w).zip(bias) {
                    *out = wj * x + bj;
                }
            }
            let block = &mut row[c * e..];
            if let Some(g) = &inputs.gated_sentiment {
                block.iter_mut().zip(g.row(r)).for_each(|(o, &v)| *o = v);
            } else if gate != 0.0 {
                let ev = &inputs.sentiment[r];
                for (j, out) in block.iter_mut().enumerate() {
                    let wj = &sent_w[j * SENTIMENT_DIM..(j + 1) * SENTIMENT_DIM];
                    let mut acc = sent_b[j];
                    for k in 0..SENTIMENT_DIM {
                        acc += wj[k] * ev[k];
                    }
                    *out = gate * acc;
                }
            }
        }
        if let Some(tc) = tangent {
            let w = &exp_w[tc * e..(tc + 1) * e];
            for r in 0..b {
                let row = &mut hs[(b + r) * width..(b + r + 1) * width];
                row[tc * e..(tc + 1) * e].copy_from_slice(w);
            }
        }
        h
    }

    /// Post-activation (and post-dropout) values of layer `l` from its
    /// stored pre-activations.
    fn activate(&self, p: &[f64], l: usize, z: &Array2<f64>, rows: usize, cache_mask: Option<&[bool]>, keep_scale: f64) -> Array2<f64> {
        let (wn, _) = self.aaf_weights(p, l);
        let width = self.layers[l].fan_out;
        let tangent = z.nrows() == 2 * rows;
        let mut a = Array2::<f64>::zeros(z.dim());
        let zs = z.as_slice().expect("standard layout");
        let as_ = a.as_slice_mut().expect("standard layout");
        let n = rows * width;
        if tangent {
            let (ap, at) = as_.split_at_mut(n);
            for i in 0..n {
                let (f, d1) = BasisJet::first_order(zs[i]);
                ap[i] = dot5(&wn, &f);
                at[i] = dot5(&wn, &d1) * zs[n + i];
            }
        } else {
            for i in 0..n {
                as_[i] = dot5(&wn, &BasisJet::values(zs[i]));
            }
        }
        if let Some(mask) = cache_mask {
            for i in 0..n {
                let m = if mask[i] { keep_scale } else { 0.0 };
                as_[i] *= m;
                if tangent {
                    as_[n + i] *= m;
                }
            }
        }
        a
    }

    /// The gated sentiment block `gate * (W e + b)` for each sentiment row,
    /// as the network would compute it internally.
    pub fn gated_sentiment(&self, p: &[f64], sentiment: &[SentimentVector], gate: f64) -> Array2<f64> {
        let e = self.config.expansion_width;
        let mut out = Array2::<f64>::zeros((sentiment.len(), e));
        for (mut row, ev) in out.rows_mut().into_iter().zip(sentiment) {
            for (j, o) in row.iter_mut().enumerate() {
                let wj = &p[self.sent_w + j * SENTIMENT_DIM..self.sent_w + (j + 1) * SENTIMENT_DIM];
                let mut acc = p[self.sent_b + j];
                for k in 0..SENTIMENT_DIM {
                    acc += wj[k] * ev[k];
                }
                *o = gate * acc;
            }
        }
        out
    }

    /// Batched forward pass.
    pub fn forward(&self, p: &[f64], inputs: NetInputs, opts: &ForwardOptions) -> Result<Forward> {
        inputs.validate(self)?;
        debug_assert_eq!(p.len(), self.n_params());
        let b = inputs.rows();
        let gate_from_params = opts.gate.is_none() && inputs.gated_sentiment.is_none();
        let gate = opts.gate.unwrap_or(p[self.gate]);
        let h0 = self.input_layer(p, &inputs, gate, opts.tangent_channel);
        let dropout = if self.config.dropout > 0.0 { opts.dropout } else { None };
        let keep_scale = 1.0 / (1.0 - self.config.dropout);
        let mut zs = Vec::with_capacity(self.layers.len());
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let w = self.weight_view(p, l);
            let mut z = acts.last().unwrap_or(&h0).dot(&w.t());
            let bias = &p[layer.b..layer.b + layer.fan_out];
            for row in z.as_slice_mut().expect("standard layout")[..b * layer.fan_out]
                .chunks_exact_mut(layer.fan_out)
            {
                row.iter_mut().zip(bias).for_each(|(v, bj)| *v += bj);
            }
            let mask = dropout.map(|key| {
                let mut r = rng::stream(key.seed, &[key.call, l as u64]);
                (0..b * layer.fan_out)
                    .map(|_| rng::uniform_open(&mut r) >= self.config.dropout)
                    .collect::<Vec<bool>>()
            });
            acts.push(self.activate(p, l, &z, b, mask.as_deref(), keep_scale));
            zs.push(z);
            masks.push(mask);
        }
        drop(h0);
        let top = acts.last().expect("non-empty").as_slice().expect("standard layout");
        let width = self.layers.last().expect("non-empty").fan_out;
        let mut output = vec![0.0; b];
        let mut tangent = opts.tangent_channel.map(|_| vec![0.0; b]);
        for r in 0..b {
            let (wo, bo) = self.heads[inputs.heads[r]];
            let w = &p[wo..wo + width];
            let row = &top[r * width..(r + 1) * width];
            output[r] = row.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() + p[bo];
            if let Some(t) = tangent.as_mut() {
                let row = &top[(b + r) * width..(b + r + 1) * width];
                t[r] = row.iter().zip(w).map(|(a, w)| a * w).sum::<f64>();
            }
        }
        Ok(Forward {
            output,
            tangent,
            cache: Cache {
                rows: b,
                tangent_channel: opts.tangent_channel,
                gate,
                gate_from_params,
                inputs,
                z: zs,
                acts,
                masks,
                keep_scale,
            },
        })
    }

    /// Reverse pass. `output_bar` and `tangent_bar` are adjoints of the
    /// output and of its tangent; parameter gradients selected by `plan` are
    /// accumulated into `grads`.
    pub fn backward(
        &self,
        p: &[f64],
        fwd: &Forward,
        output_bar: &[f64],
        tangent_bar: Option<&[f64]>,
        plan: &BackwardPlan,
        grads: &mut [f64],
    ) -> InputGrads {
        let cache = &fwd.cache;
        let b = cache.rows;
        assert_eq!(output_bar.len(), b);
        assert_eq!(grads.len(), self.n_params());
        let tangent = cache.tangent_channel.is_some();
        let tangent_bar = if tangent { tangent_bar } else { None };
        let stacked = if tangent { 2 * b } else { b };
        let n_layers = self.layers.len();
        let mut input_grads = InputGrads {
            channels: vec![None; self.channels()],
            gated_block: None,
        };

        // Heads.
        let top_l = n_layers - 1;
        let width = self.layers[top_l].fan_out;
        let top = cache.acts[top_l].as_slice().expect("standard layout");
        let mut g = Array2::<f64>::zeros((stacked, width));
        {
            let gs = g.as_slice_mut().expect("standard layout");
            for r in 0..b {
                let hidx = cache.inputs.heads[r];
                let (wo, bo) = self.heads[hidx];
                let ub = output_bar[r];
                let tb = tangent_bar.map_or(0.0, |t| t[r]);
                if plan.heads[hidx] {
                    let row = &top[r * width..(r + 1) * width];
                    for j in 0..width {
                        grads[wo + j] += ub * row[j];
                    }
                    if tangent {
                        let trow = &top[(b + r) * width..(b + r + 1) * width];
                        for j in 0..width {
                            grads[wo + j] += tb * trow[j];
                        }
                    }
                    grads[bo] += ub;
                }
                let w = &p[wo..wo + width];
                for j in 0..width {
                    gs[r * width + j] = ub * w[j];
                }
                if tangent {
                    for j in 0..width {
                        gs[(b + r) * width + j] = tb * w[j];
                    }
                }
            }
        }

        // Dense layers, top down. `g` holds the adjoint of layer l's output.
        for l in (0..n_layers).rev() {
            if !plan.needs_layer_adjoint(l) {
                return input_grads;
            }
            let layer = self.layers[l];
            let out = layer.fan_out;
            let n = b * out;
            let (wn, norm) = self.aaf_weights(p, l);
            let z = cache.z[l].as_slice().expect("standard layout");
            let mask = cache.masks[l].as_deref();
            let gs = g.as_slice().expect("standard layout");
            let mut zb = Array2::<f64>::zeros((stacked, out));
            let mut what = [0.0; N_BASIS];
            {
                let zbs = zb.as_slice_mut().expect("standard layout");
                for i in 0..n {
                    let m = match mask {
                        Some(mk) if !mk[i] => continue,
                        Some(_) => cache.keep_scale,
                        None => 1.0,
                    };
                    let ab = gs[i] * m;
                    if tangent {
                        let jet = BasisJet::at(z[i]);
                        let zt = z[n + i];
                        let tb = gs[n + i] * m;
                        let a1 = dot5(&wn, &jet.d1);
                        let a2 = dot5(&wn, &jet.d2);
                        zbs[i] = ab * a1 + tb * a2 * zt;
                        zbs[n + i] = tb * a1;
                        if plan.layers[l].1 {
                            for k in 0..N_BASIS {
                                what[k] += ab * jet.f[k] + tb * zt * jet.d1[k];
                            }
                        }
                    } else {
                        let (f, d1) = BasisJet::first_order(z[i]);
                        zbs[i] = ab * dot5(&wn, &d1);
                        if plan.layers[l].1 {
                            for k in 0..N_BASIS {
                                what[k] += ab * f[k];
                            }
                        }
                    }
                }
            }
            if plan.layers[l].1 {
                // d(w/|w|)/dw applied to the adjoint of the normalised weights
                let proj = dot5(&wn, &what);
                for k in 0..N_BASIS {
                    grads[layer.aaf + k] += (what[k] - wn[k] * proj) / norm;
                }
            }
            if plan.layers[l].0 {
                let h0;
                let a_prev = if l == 0 {
                    h0 = self.input_layer(p, &cache.inputs, cache.gate, cache.tangent_channel);
                    &h0
                } else {
                    &cache.acts[l - 1]
                };
                let nw = layer.fan_in * layer.fan_out;
                let mut gw = ArrayViewMut2::from_shape(
                    (layer.fan_out, layer.fan_in),
                    &mut grads[layer.w..layer.w + nw],
                )
                .expect("layout");
                general_mat_mul(1.0, &zb.t(), a_prev, 1.0, &mut gw);
                let zbs = zb.as_slice().expect("standard layout");
                let gb = &mut grads[layer.b..layer.b + out];
                for row in zbs[..n].chunks_exact(out) {
                    gb.iter_mut().zip(row).for_each(|(g, v)| *g += v);
                }
            }
            let below = if l == 0 {
                plan.needs_input_adjoint()
            } else {
                plan.needs_layer_adjoint(l - 1)
            };
            if !below {
                return input_grads;
            }
            g = zb.dot(&self.weight_view(p, l));
        }

        self.input_backward(p, cache, &g, plan, grads, &mut input_grads);
        input_grads
    }

    fn input_backward(
        &self,
        p: &[f64],
        cache: &Cache,
        g: &Array2<f64>,
        plan: &BackwardPlan,
        grads: &mut [f64],
        out: &mut InputGrads,
    ) {
        let b = cache.rows;
        let e = self.config.expansion_width;
        let c = self.channels();
        let width = self.input_width();
        let gs = g.as_slice().expect("standard layout");
        let inputs = &cache.inputs;

        for &ch in &plan.input_channels {
            let w = &p[self.exp_w + ch * e..self.exp_w + (ch + 1) * e];
            let col = (0..b)
                .map(|r| {
                    let hb = &gs[r * width + ch * e..r * width + (ch + 1) * e];
                    hb.iter().zip(w).map(|(h, w)| h * w).sum::<f64>()
                })
                .collect();
            out.channels[ch] = Some(col);
        }
        if plan.expansion {
            for r in 0..b {
                for ch in 0..c {
                    let x = inputs.channels[ch][r];
                    let hb = &gs[r * width + ch * e..r * width + (ch + 1) * e];
                    for j in 0..e {
                        grads[self.exp_w + ch * e + j] += hb[j] * x;
                        grads[self.exp_b + ch * e + j] += hb[j];
                    }
                }
                if let Some(tc) = cache.tangent_channel {
                    let tb = &gs[(b + r) * width + tc * e..(b + r) * width + (tc + 1) * e];
                    for j in 0..e {
                        grads[self.exp_w + tc * e + j] += tb[j];
                    }
                }
            }
        }
        if plan.gated_block {
            let mut blk = Array2::<f64>::zeros((b, e));
            for r in 0..b {
                blk.row_mut(r)
                    .iter_mut()
                    .zip(&gs[r * width + c * e..(r + 1) * width])
                    .for_each(|(o, v)| *o = *v);
            }
            out.gated_block = Some(blk);
        }
        if inputs.gated_sentiment.is_some() {
            return;
        }
        let want_gate = plan.gate && cache.gate_from_params;
        if !(want_gate || plan.sentiment) {
            return;
        }
        for r in 0..b {
            let blk = &gs[r * width + c * e..(r + 1) * width];
            let ev = &inputs.sentiment[r];
            let mut gate_bar = 0.0;
            for j in 0..e {
                let sw = self.sent_w + j * SENTIMENT_DIM;
                if want_gate {
                    let mut hs = p[self.sent_b + j];
                    for k in 0..SENTIMENT_DIM {
                        hs += p[sw + k] * ev[k];
                    }
                    gate_bar += blk[j] * hs;
                }
                if plan.sentiment {
                    let hsb = cache.gate * blk[j];
                    for k in 0..SENTIMENT_DIM {
                        grads[sw + k] += hsb * ev[k];
                    }
                    grads[self.sent_b + j] += hsb;
                }
            }
            if want_gate {
                grads[self.gate] += gate_bar;
            }
        }
    }
}
