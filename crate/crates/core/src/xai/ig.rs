use std::ops::Range;

use super::view::ModelView;
use crate::error::{Error, Result};

/// Quadrature points along the straight path from baseline to input.
pub const IG_STEPS: usize = 10;

/// A named block of features whose attributions are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroup {
    pub name: String,
    pub features: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionResult {
    /// One attribution per feature.
    pub attributions: Vec<f64>,
    /// Summed attribution of each group, in the order given.
    pub group_attributions: Vec<f64>,
    /// `|A_g| / Σ|A|` over groups; all zero when every group attribution is.
    pub shares: Vec<f64>,
    /// `f(x) - f(baseline)`.
    pub delta: f64,
    /// `|Σ attributions - delta|`.
    pub completeness_gap: f64,
}

/// Integrated gradients with the midpoint rule on `m` steps.
///
/// Features outside every group must agree between `x` and `baseline`.
pub fn integrated_gradients(
    f: &dyn ModelView,
    x: &[f64],
    baseline: &[f64],
    m: usize,
    groups: &[FeatureGroup],
) -> Result<AttributionResult> {
    let d = f.dim();
    if x.len() != d || baseline.len() != d {
        return Err(Error::Validation(format!(
            "expected {d} features, got input {} and baseline {}",
            x.len(),
            baseline.len()
        )));
    }
    if m == 0 {
        return Err(Error::Config("integrated gradients needs at least one step".into()));
    }
    let mut grouped = vec![false; d];
    for g in groups {
        if g.features.end > d {
            return Err(Error::Validation(format!("group {} exceeds {d} features", g.name)));
        }
        grouped[g.features.clone()].iter_mut().for_each(|v| *v = true);
    }
    if let Some(i) = (0..d).find(|&i| !grouped[i] && x[i] != baseline[i]) {
        return Err(Error::Validation(format!(
            "feature {i} is outside every group but differs from the baseline"
        )));
    }
    let points: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let a = (k as f64 + 0.5) / m as f64;
            baseline.iter().zip(x).map(|(b, x)| b + a * (x - b)).collect()
        })
        .collect();
    let grads = f.grad(&points)?;
    // running mean: exact when the gradient is constant along the path
    let mut attributions = vec![0.0; d];
    for (k, g) in grads.iter().enumerate() {
        let w = 1.0 / (k + 1) as f64;
        attributions.iter_mut().zip(g).for_each(|(a, g)| *a += (g - *a) * w);
    }
    for ((a, xi), bi) in attributions.iter_mut().zip(x).zip(baseline) {
        *a *= xi - bi;
    }
    let ends = f.eval(&[x.to_vec(), baseline.to_vec()])?;
    let delta = ends[0] - ends[1];
    let group_attributions: Vec<f64> = groups
        .iter()
        .map(|g| attributions[g.features.clone()].iter().sum())
        .collect();
    let total: f64 = group_attributions.iter().map(|a| a.abs()).sum();
    let shares = group_attributions
        .iter()
        .map(|a| if total > 0.0 { a.abs() / total } else { 0.0 })
        .collect();
    let completeness_gap = (attributions.iter().sum::<f64>() - delta).abs();
    Ok(AttributionResult {
        attributions,
        group_attributions,
        shares,
        delta,
        completeness_gap,
    })
}
