use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::N_BASIS;

/// Number of sentiment features per moneyness class.
pub const SENTIMENT_DIM: usize = 5;

/// Input channels of the value network, in concatenation order.
pub mod value_channel {
    pub const T: usize = 0;
    pub const X: usize = 1;
    pub const STRIKE: usize = 2;
    pub const TAU: usize = 3;
    pub const SIGMA: usize = 4;
    pub const RATE: usize = 5;
    pub const COUNT: usize = 6;
    pub const NAMES: [&str; COUNT] = ["t", "X", "K", "tau", "sigma", "r"];
}

/// Input channels of the generator network, in concatenation order.
pub mod generator_channel {
    pub const T: usize = 0;
    pub const X: usize = 1;
    pub const Y: usize = 2;
    pub const Z: usize = 3;
    pub const STRIKE: usize = 4;
    pub const TAU: usize = 5;
    pub const SIGMA: usize = 6;
    pub const RATE: usize = 7;
    pub const COUNT: usize = 8;
    pub const NAMES: [&str; COUNT] = ["t", "X", "Y", "Z", "K", "tau", "sigma", "r"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Value,
    Generator,
}

impl NetKind {
    pub fn channels(self) -> usize {
        match self {
            NetKind::Value => value_channel::COUNT,
            NetKind::Generator => generator_channel::COUNT,
        }
    }

    pub fn head_names(self) -> &'static [&'static str] {
        match self {
            NetKind::Value => &["call", "put"],
            NetKind::Generator => &["out"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NetKind::Value => "value",
            NetKind::Generator => "generator",
        }
    }
}

/// Width and regularisation settings of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    /// Width each scalar input (and the sentiment vector) is expanded to.
    pub expansion_width: usize,
    /// Output widths of the adaptive-activation dense layers.
    pub hidden: Vec<usize>,
    /// Dropout rate after each hidden layer in training mode.
    pub dropout: f64,
    /// Xavier gain of the per-variable expansion layers.
    pub expansion_gain: f64,
    /// Xavier gain of the sentiment embedding, dense layers and heads.
    pub dense_gain: f64,
    /// Currency unit the model is trained in: underlying, strike, labels
    /// and predictions are divided by this before they reach the network.
    pub price_scale: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig::value()
    }
}

impl NetConfig {
    pub fn value() -> Self {
        NetConfig {
            expansion_width: 50,
            hidden: vec![300, 256, 256, 128],
            dropout: 0.1,
            expansion_gain: 0.01,
            dense_gain: 1.0,
            price_scale: 1.0,
        }
    }

    pub fn generator() -> Self {
        NetConfig {
            dropout: 0.0,
            ..NetConfig::value()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.expansion_width == 0 || self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config(
                "network widths must be positive and at least one hidden layer is required".into(),
            ));
        }
        if !(self.price_scale.is_finite() && self.price_scale > 0.0) {
            return Err(Error::Config(format!(
                "price_scale must be positive, got {}",
                self.price_scale
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// A named contiguous slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DenseLayer {
    pub w: usize,
    pub b: usize,
    pub aaf: usize,
    pub fan_in: usize,
    pub fan_out: usize,
}

/// Shape and parameter layout of a value or generator network.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub kind: NetKind,
    pub config: NetConfig,
    segments: Vec<Segment>,
    pub(crate) exp_w: usize,
    pub(crate) exp_b: usize,
    pub(crate) sent_w: usize,
    pub(crate) sent_b: usize,
    pub(crate) gate: usize,
    pub(crate) layers: Vec<DenseLayer>,
    /// (weight offset, bias offset) per head.
    pub(crate) heads: Vec<(usize, usize)>,
    n_params: usize,
}

impl Architecture {
    pub fn new(kind: NetKind, config: NetConfig) -> Result<Self> {
        config.validate()?;
        let e = config.expansion_width;
        let c = kind.channels();
        let mut segments = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, rows: usize, cols: usize| {
            segments.push(Segment {
                name,
                offset,
                rows,
                cols,
            });
            let at = offset;
            offset += rows * cols;
            at
        };
        let exp_w = push("expansion.weight".into(), c, e);
        let exp_b = push("expansion.bias".into(), c, e);
        let sent_w = push("sentiment.weight".into(), e, SENTIMENT_DIM);
        let sent_b = push("sentiment.bias".into(), 1, e);
        let gate = push("gate".into(), 1, 1);
        let mut layers = Vec::new();
        let mut fan_in = (c + 1) * e;
        for (i, &fan_out) in config.hidden.iter().enumerate() {
            let w = push(format!("backbone.{i}.weight"), fan_out, fan_in);
            let b = push(format!("backbone.{i}.bias"), 1, fan_out);
            let aaf = push(format!("aaf.{i}"), 1, N_BASIS);
            layers.push(DenseLayer {
                w,
                b,
                aaf,
                fan_in,
                fan_out,
            });
            fan_in = fan_out;
        }
        let heads = kind
            .head_names()
            .iter()
            .map(|h| {
                let w = push(format!("head.{h}.weight"), 1, fan_in);
                let b = push(format!("head.{h}.bias"), 1, 1);
                (w, b)
            })
            .collect();
        Ok(Architecture {
            kind,
            config,
            segments,
            exp_w,
            exp_b,
            sent_w,
            sent_b,
            gate,
            layers,
            heads,
            n_params: offset,
        })
    }

    pub fn value(config: NetConfig) -> Result<Self> {
        Architecture::new(NetKind::Value, config)
    }

    pub fn generator(config: NetConfig) -> Result<Self> {
        Architecture::new(NetKind::Generator, config)
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn channels(&self) -> usize {
        self.kind.channels()
    }

    /// Width of the concatenated financial + gated sentiment input.
    pub fn input_width(&self) -> usize {
        (self.channels() + 1) * self.config.expansion_width
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn gate_index(&self) -> usize {
        self.gate
    }

    /// Mask selecting every parameter whose segment name satisfies `pred`.
    pub fn mask_where(&self, pred: impl Fn(&str) -> bool) -> Vec<bool> {
        let mut mask = vec![false; self.n_params];
        for s in &self.segments {
            if pred(&s.name) {
                mask[s.range()].iter_mut().for_each(|m| *m = true);
            }
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_widths_give_350_and_450_inputs() {
        let v = Architecture::value(NetConfig::value()).unwrap();
        assert_eq!(v.input_width(), 350);
        let g = Architecture::generator(NetConfig::generator()).unwrap();
        assert_eq!(g.input_width(), 450);
        assert_eq!(v.layers[0].fan_in, 350);
        assert_eq!(v.layers.last().unwrap().fan_out, 128);
        assert_eq!(v.heads.len(), 2);
        assert_eq!(g.heads.len(), 1);
    }

    #[test]
    fn segments_tile_the_parameter_vector() {
        let v = Architecture::value(NetConfig::value()).unwrap();
        let mut next = 0;
        for s in v.segments() {
            assert_eq!(s.offset, next, "{}", s.name);
            next += s.len();
        }
        assert_eq!(next, v.n_params());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = NetConfig::value();
        c.hidden.clear();
        assert!(Architecture::value(c).is_err());
        let c = NetConfig {
            dropout: 1.0,
            ..NetConfig::value()
        };
        assert!(Architecture::value(c).is_err());
    }
}
