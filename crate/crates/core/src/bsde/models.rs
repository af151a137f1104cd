use super::input::PricingInput;
use crate::error::Result;
use crate::nets::{
    generator_channel as gc, value_channel as vc, Architecture, DropoutKey, ForwardOptions,
    NetInputs,
};

/// Value function u(t, X; contract) with its X-derivative.
pub trait ValueModel {
    /// Values and ∂u/∂X at time `t` for every price in `x`.
    fn value(&self, c: &PricingInput, t: f64, sigma: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// Generator g(t, X, Y, Z; contract).
pub trait GeneratorModel {
    fn generator(
        &self,
        c: &PricingInput,
        t: f64,
        sigma: f64,
        x: &[f64],
        y: &[f64],
        z: &[f64],
    ) -> Result<Vec<f64>>;
}

/// u ≡ c.
#[derive(Debug, Clone, Copy)]
pub struct ConstantValue(pub f64);

impl ValueModel for ConstantValue {
    fn value(&self, _: &PricingInput, _: f64, _: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((vec![self.0; x.len()], vec![0.0; x.len()]))
    }
}

/// u(t, X) = X.
#[derive(Debug, Clone, Copy)]
pub struct IdentityValue;

impl ValueModel for IdentityValue {
    fn value(&self, _: &PricingInput, _: f64, _: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((x.to_vec(), vec![1.0; x.len()]))
    }
}

/// g ≡ c.
#[derive(Debug, Clone, Copy)]
pub struct ConstantGenerator(pub f64);

impl GeneratorModel for ConstantGenerator {
    fn generator(&self, _: &PricingInput, _: f64, _: f64, x: &[f64], _: &[f64], _: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.0; x.len()])
    }
}

/// g = -r Y, the Black-Scholes generator.
#[derive(Debug, Clone, Copy)]
pub struct LinearGenerator;

impl GeneratorModel for LinearGenerator {
    fn generator(&self, c: &PricingInput, _: f64, _: f64, _: &[f64], y: &[f64], _: &[f64]) -> Result<Vec<f64>> {
        Ok(y.iter().map(|v| -c.rate * v).collect())
    }
}

pub(crate) fn push_value_row(inp: &mut NetInputs, c: &PricingInput, t: f64, x: f64, sigma: f64) {
    let ch = &mut inp.channels;
    ch[vc::T].push(t);
    ch[vc::X].push(x);
    ch[vc::STRIKE].push(c.strike);
    ch[vc::TAU].push(c.tau);
    ch[vc::SIGMA].push(sigma);
    ch[vc::RATE].push(c.rate);
    inp.sentiment.push(c.sentiment);
    inp.heads.push(c.kind.head());
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn push_generator_row(
    inp: &mut NetInputs,
    c: &PricingInput,
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    sigma: f64,
) {
    let ch = &mut inp.channels;
    ch[gc::T].push(t);
    ch[gc::X].push(x);
    ch[gc::Y].push(y);
    ch[gc::Z].push(z);
    ch[gc::STRIKE].push(c.strike);
    ch[gc::TAU].push(c.tau);
    ch[gc::SIGMA].push(sigma);
    ch[gc::RATE].push(c.rate);
    inp.sentiment.push(c.sentiment);
    inp.heads.push(0);
}

/// Value network in inference mode (or with a fixed dropout key).
#[derive(Debug, Clone, Copy)]
pub struct NeuralValue<'a> {
    pub arch: &'a Architecture,
    pub params: &'a [f64],
    pub gate: Option<f64>,
    pub dropout: Option<DropoutKey>,
}

impl<'a> NeuralValue<'a> {
    pub fn new(arch: &'a Architecture, params: &'a [f64]) -> Self {
        NeuralValue { arch, params, gate: None, dropout: None }
    }
}

impl ValueModel for NeuralValue<'_> {
    fn value(&self, c: &PricingInput, t: f64, sigma: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut inp = NetInputs::with_rows(self.arch.channels(), x.len());
        for &xi in x {
            push_value_row(&mut inp, c, t, xi, sigma);
        }
        let opts = ForwardOptions {
            tangent_channel: Some(vc::X),
            dropout: self.dropout,
            gate: self.gate,
        };
        let f = self.arch.forward(self.params, inp, &opts)?;
        let d = f.tangent.expect("tangent requested");
        Ok((f.output, d))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NeuralGenerator<'a> {
    pub arch: &'a Architecture,
    pub params: &'a [f64],
    pub gate: Option<f64>,
}

impl<'a> NeuralGenerator<'a> {
    pub fn new(arch: &'a Architecture, params: &'a [f64]) -> Self {
        NeuralGenerator { arch, params, gate: None }
    }
}

impl GeneratorModel for NeuralGenerator<'_> {
    fn generator(
        &self,
        c: &PricingInput,
        t: f64,
        sigma: f64,
        x: &[f64],
        y: &[f64],
        z: &[f64],
    ) -> Result<Vec<f64>> {
        let mut inp = NetInputs::with_rows(self.arch.channels(), x.len());
        for j in 0..x.len() {
            push_generator_row(&mut inp, c, t, x[j], y[j], z[j], sigma);
        }
        let opts = ForwardOptions { gate: self.gate, ..Default::default() };
        Ok(self.arch.forward(self.params, inp, &opts)?.output)
    }
}
