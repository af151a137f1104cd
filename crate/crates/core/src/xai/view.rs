use ndarray::Array2;

use crate::bsde::{push_value_row, PricingInput};
use crate::error::{Error, Result};
use crate::nets::{value_channel, Architecture, BackwardPlan, ForwardOptions, NetInputs};

/// A differentiable scalar function of a flat feature vector, evaluated on
/// batches of points.
pub trait ModelView {
    fn dim(&self) -> usize;
    fn eval(&self, points: &[Vec<f64>]) -> Result<Vec<f64>>;
    fn grad(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
}

/// `w·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    pub w: Vec<f64>,
    pub b: f64,
}

impl ModelView for LinearProbe {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn eval(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(points
            .iter()
            .map(|x| self.b + self.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>())
            .collect())
    }

    fn grad(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(vec![self.w.clone(); points.len()])
    }
}

/// The value network's t = 0 price of one contract as a function of
/// `[σ, gated sentiment block...]`, with every other input held fixed.
pub struct PriceView<'a> {
    arch: &'a Architecture,
    params: &'a [f64],
    contract: PricingInput,
}

impl<'a> PriceView<'a> {
    pub fn new(arch: &'a Architecture, params: &'a [f64], contract: &PricingInput) -> Self {
        PriceView {
            arch,
            params,
            contract: contract.in_units(arch.config.price_scale),
        }
    }

    /// Feature vector of the contract as the network sees it under `gate`.
    pub fn point(&self, sigma: f64, gate: f64) -> Vec<f64> {
        let blk = self.arch.gated_sentiment(self.params, &[self.contract.sentiment], gate);
        std::iter::once(sigma).chain(blk.iter().copied()).collect()
    }

    fn inputs(&self, points: &[Vec<f64>]) -> Result<NetInputs> {
        let e = self.arch.config.expansion_width;
        let mut inp = NetInputs::with_rows(self.arch.channels(), points.len());
        let mut blk = Array2::<f64>::zeros((points.len(), e));
        for (r, x) in points.iter().enumerate() {
            if x.len() != e + 1 {
                return Err(Error::Validation(format!(
                    "price view expects {} features, got {}",
                    e + 1,
                    x.len()
                )));
            }
            push_value_row(&mut inp, &self.contract, 0.0, self.contract.x0, x[0]);
            blk.row_mut(r).iter_mut().zip(&x[1..]).for_each(|(o, v)| *o = *v);
        }
        inp.gated_sentiment = Some(blk);
        Ok(inp)
    }
}

impl ModelView for PriceView<'_> {
    fn dim(&self) -> usize {
        self.arch.config.expansion_width + 1
    }

    fn eval(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let fwd = self.arch.forward(self.params, self.inputs(points)?, &ForwardOptions::default())?;
        let s = self.arch.config.price_scale;
        Ok(fwd.output.iter().map(|y| y * s).collect())
    }

    fn grad(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let fwd = self.arch.forward(self.params, self.inputs(points)?, &ForwardOptions::default())?;
        let plan = BackwardPlan::none(self.arch)
            .with_input_channels(&[value_channel::SIGMA])
            .with_gated_block();
        let s = self.arch.config.price_scale;
        let ones = vec![s; points.len()];
        let mut unused = vec![0.0; self.arch.n_params()];
        let g = self.arch.backward(self.params, &fwd, &ones, None, &plan, &mut unused);
        let sig = g.channels[value_channel::SIGMA].as_ref().expect("requested channel");
        let blk = g.gated_block.as_ref().expect("requested block");
        Ok((0..points.len())
            .map(|r| std::iter::once(sig[r]).chain(blk.row(r).iter().copied()).collect())
            .collect())
    }
}
