use std::collections::BTreeMap;
use std::io::Write;

use crate::error::Result;
use crate::option::OptionKind;
use crate::special::normal_cdf;

/// Black-Scholes price of a European option; the put comes from parity.
/// Degenerate volatility or maturity falls back to the discounted intrinsic
/// value.
pub fn bsm_price(x: f64, k: f64, tau: f64, sigma: f64, r: f64, kind: OptionKind) -> f64 {
    let disc_k = k * (-r * tau.max(0.0)).exp();
    let call = if tau <= 0.0 || sigma <= 0.0 {
        (x - disc_k).max(0.0)
    } else {
        let vol = sigma * tau.sqrt();
        let d1 = ((x / k).ln() + (r + 0.5 * sigma * sigma) * tau) / vol;
        let d2 = d1 - vol;
        x * normal_cdf(d1) - disc_k * normal_cdf(d2)
    };
    match kind {
        OptionKind::Call => call,
        OptionKind::Put => call - x + disc_k,
    }
}

/// One labelled contract for the volatility sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Grouping key, e.g. `2022-03`.
    pub month: String,
    pub x: f64,
    pub k: f64,
    pub tau: f64,
    pub kind: OptionKind,
    pub label: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMonth {
    pub month: String,
    pub n: usize,
    /// MAE per grid volatility.
    pub mae: Vec<f64>,
    /// Index of the smallest MAE (first on ties).
    pub argmin: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub sigmas: Vec<f64>,
    pub months: Vec<SweepMonth>,
}

/// Monthly MAE of constant-volatility BSM prices over a volatility grid.
pub fn bsm_sweep(rows: &[SweepRow], grid: &[f64], r: f64) -> SweepTable {
    let mut by_month: BTreeMap<&str, Vec<&SweepRow>> = BTreeMap::new();
    for row in rows {
        by_month.entry(&row.month).or_default().push(row);
    }
    let months = by_month
        .into_iter()
        .map(|(month, rows)| {
            let mae: Vec<f64> = grid
                .iter()
                .map(|&s| {
                    rows.iter()
                        .map(|c| (bsm_price(c.x, c.k, c.tau, s, r, c.kind) - c.label).abs())
                        .sum::<f64>()
                        / rows.len() as f64
                })
                .collect();
            let argmin = (0..mae.len()).fold(0, |best, i| if mae[i] < mae[best] { i } else { best });
            SweepMonth {
                month: month.to_string(),
                n: rows.len(),
                mae,
                argmin,
            }
        })
        .collect();
    SweepTable {
        sigmas: grid.to_vec(),
        months,
    }
}

impl SweepTable {
    /// Columns: month, n, one `mae_sigma_<s>` per grid value, best_sigma.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["month".to_string(), "n".to_string()];
        header.extend(self.sigmas.iter().map(|s| format!("mae_sigma_{s:.2}")));
        header.push("best_sigma".into());
        out.write_record(&header)?;
        for m in &self.months {
            let mut rec = vec![m.month.clone(), m.n.to_string()];
            rec.extend(m.mae.iter().map(|v| format!("{v:.6}")));
            rec.push(format!("{:.2}", self.sigmas[m.argmin]));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| crate::Error::io("sweep csv", e))?;
        Ok(())
    }
}
