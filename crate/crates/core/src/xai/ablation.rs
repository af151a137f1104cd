use crate::bsde::{predict_prices, PricingInput};
use crate::error::Result;
use crate::evaluation::metrics;
use crate::nets::Architecture;

/// Volatility used when the trajectory is ablated.
pub const CONSTANT_SIGMA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RvMode {
    Trajectory,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SentMode {
    Enabled,
    GatedOff,
}

/// Which information reaches the network at inference time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AblationConfig {
    pub rv: RvMode,
    pub sent: SentMode,
}

impl AblationConfig {
    pub const NONE: Self = AblationConfig { rv: RvMode::Constant, sent: SentMode::GatedOff };
    pub const RV_ONLY: Self = AblationConfig { rv: RvMode::Trajectory, sent: SentMode::GatedOff };
    pub const SENT_ONLY: Self = AblationConfig { rv: RvMode::Constant, sent: SentMode::Enabled };
    pub const FULL: Self = AblationConfig { rv: RvMode::Trajectory, sent: SentMode::Enabled };
    pub const ALL: [Self; 4] = [Self::NONE, Self::RV_ONLY, Self::SENT_ONLY, Self::FULL];

    pub fn name(self) -> &'static str {
        match (self.rv, self.sent) {
            (RvMode::Constant, SentMode::GatedOff) => "none",
            (RvMode::Trajectory, SentMode::GatedOff) => "rv",
            (RvMode::Constant, SentMode::Enabled) => "sent",
            (RvMode::Trajectory, SentMode::Enabled) => "full",
        }
    }
}

/// MAE of the value network's prices with inputs masked per `cfg`.
/// Parameters are never touched; `FULL` is the standard evaluation.
pub fn evaluate_ablation(
    arch: &Architecture,
    params: &[f64],
    inputs: &[PricingInput],
    cfg: AblationConfig,
) -> Result<f64> {
    let gate = match cfg.sent {
        SentMode::Enabled => None,
        SentMode::GatedOff => Some(0.0),
    };
    let labels: Vec<f64> = inputs.iter().map(|c| c.label).collect();
    let prices = match cfg.rv {
        RvMode::Trajectory => predict_prices(arch, params, inputs, gate)?,
        RvMode::Constant => {
            let flat: Vec<PricingInput> = inputs
                .iter()
                .map(|c| PricingInput {
                    sigma_steps: vec![CONSTANT_SIGMA; c.steps()],
                    ..c.clone()
                })
                .collect();
            predict_prices(arch, params, &flat, gate)?
        }
    };
    Ok(metrics(&labels, &prices)?.mae)
}

/// `(E_B - E_C, E_TB - E_C)`: the error each baseline gives up relative to
/// the network fed the same (ablated) information.
pub fn arch_advantage(e_b: f64, e_tb: f64, e_c: f64) -> (f64, f64) {
    (e_b - e_c, e_tb - e_c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapleyResult {
    pub phi_rv: f64,
    pub phi_sent: f64,
    /// `phi_rv + phi_sent`, equal to `E_none - E_full`.
    pub total_gain: f64,
    /// `(phi_rv, phi_sent) / total_gain`; `None` when the gain is zero.
    pub shares: Option<(f64, f64)>,
}

/// Exact two-player Shapley split of the error reduction from the four
/// ablation MAEs.
pub fn shapley_two_player(e_none: f64, e_rv: f64, e_sent: f64, e_full: f64) -> ShapleyResult {
    let phi_rv = 0.5 * ((e_none - e_rv) + (e_sent - e_full));
    let phi_sent = 0.5 * ((e_none - e_sent) + (e_rv - e_full));
    let total_gain = phi_rv + phi_sent;
    ShapleyResult {
        phi_rv,
        phi_sent,
        total_gain,
        shares: (total_gain != 0.0).then(|| (phi_rv / total_gain, phi_sent / total_gain)),
    }
}
