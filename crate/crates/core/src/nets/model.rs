use std::path::Path;

use super::arch::{Architecture, NetConfig, NetKind};
use super::checkpoint::{self, NetState};
use crate::error::{Error, Result};

/// A value network and a generator network trained together.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingModel {
    pub value: Architecture,
    pub generator: Architecture,
    pub value_params: Vec<f64>,
    pub generator_params: Vec<f64>,
}

impl PricingModel {
    /// Both gates start at `gate_init`.
    pub fn new(value: NetConfig, generator: NetConfig, seed: u64, gate_init: f64) -> Result<Self> {
        if value.price_scale != generator.price_scale {
            return Err(Error::Config(format!(
                "value and generator price_scale differ ({} vs {})",
                value.price_scale, generator.price_scale
            )));
        }
        let value = Architecture::value(value)?;
        let generator = Architecture::generator(generator)?;
        Ok(PricingModel {
            value_params: value.init_params(seed, gate_init),
            generator_params: generator.init_params(seed, gate_init),
            value,
            generator,
        })
    }

    pub fn n_params(&self) -> usize {
        self.value.n_params() + self.generator.n_params()
    }

    /// Flat view with value parameters first.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.value_params.clone();
        p.extend_from_slice(&self.generator_params);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let n = self.value.n_params();
        assert_eq!(p.len(), self.n_params());
        self.value_params.copy_from_slice(&p[..n]);
        self.generator_params.copy_from_slice(&p[n..]);
    }

    pub fn price_scale(&self) -> f64 {
        self.value.config.price_scale
    }

    pub fn gate(&self, kind: NetKind) -> f64 {
        match kind {
            NetKind::Value => self.value_params[self.value.gate_index()],
            NetKind::Generator => self.generator_params[self.generator.gate_index()],
        }
    }

    pub fn set_gate(&mut self, gamma: f64) {
        let (v, g) = (self.value.gate_index(), self.generator.gate_index());
        self.value_params[v] = gamma;
        self.generator_params[g] = gamma;
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(
            path,
            &[
                NetState { arch: self.value.clone(), params: self.value_params.clone() },
                NetState { arch: self.generator.clone(), params: self.generator_params.clone() },
            ],
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut nets = checkpoint::load(path)?.into_iter();
        match (nets.next(), nets.next(), nets.next()) {
            (Some(v), Some(g), None)
                if v.arch.kind == NetKind::Value && g.arch.kind == NetKind::Generator =>
            {
                Ok(PricingModel {
                    value: v.arch,
                    generator: g.arch,
                    value_params: v.params,
                    generator_params: g.params,
                })
            }
            _ => Err(Error::Data(format!(
                "{}: expected a value network followed by a generator network",
                path.display()
            ))),
        }
    }
}
