use crate::nets::SentimentVector;
use crate::option::OptionKind;

/// Everything the engine needs about one contract on its pricing date.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingInput {
    pub x0: f64,
    pub strike: f64,
    /// Maturity in years.
    pub tau: f64,
    pub rate: f64,
    pub kind: OptionKind,
    /// Volatility per time step (length N).
    pub sigma_steps: Vec<f64>,
    pub sentiment: SentimentVector,
    pub label: f64,
}

impl PricingInput {
    pub fn steps(&self) -> usize {
        self.sigma_steps.len()
    }

    pub fn dt(&self) -> f64 {
        self.tau / self.steps() as f64
    }

    /// The same contract with every price-denominated field divided by `scale`.
    pub fn in_units(&self, scale: f64) -> Self {
        PricingInput {
            x0: self.x0 / scale,
            strike: self.strike / scale,
            label: self.label / scale,
            ..self.clone()
        }
    }

    /// Volatility fed to the terminal evaluation (last step's value).
    pub fn terminal_sigma(&self) -> f64 {
        *self.sigma_steps.last().expect("at least one step")
    }
}

impl PricingInput {
    /// Builds the engine input for a contract with an `n`-step grid.
    pub fn from_contract(
        c: &crate::features::OptionContract,
        trajectory: &crate::market::VolTrajectory,
        sentiment: SentimentVector,
        n: usize,
        rate: f64,
    ) -> Self {
        PricingInput {
            x0: c.underlying,
            strike: c.strike,
            tau: c.tau(),
            rate,
            kind: c.kind,
            sigma_steps: trajectory.align(n),
            sentiment,
            label: c.label,
        }
    }
}
