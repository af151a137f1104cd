use std::collections::BTreeMap;
use std::path::Path;

use gprice::bsde::{predict_prices, PricingInput};
use gprice::evaluation::{report_by_bucket, write_extreme, write_predictions, write_report, BucketReport};
use gprice::features::{split_dataset, MoneynessClass, OptionContract};
use gprice::xai::{
    evaluate_ablation, integrated_gradients, shapley_two_player, AblationConfig, FeatureGroup,
    ModelView, PriceView,
};
use gprice::OptionKind;
use log::info;

use super::train::{finetune_buckets, model_for};
use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributionMethod {
    Ig,
    Shapley,
}

impl std::str::FromStr for AttributionMethod {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" => Ok(AttributionMethod::Ig),
            "shapley" => Ok(AttributionMethod::Shapley),
            other => Err(CliError::Config(format!("unknown attribution method `{other}`"))),
        }
    }
}

type Bucket = (MoneynessClass, OptionKind);

/// Test contracts of one seed grouped by bucket, with their engine inputs.
struct TestSet {
    groups: BTreeMap<Bucket, (Vec<OptionContract>, Vec<PricingInput>)>,
}

impl TestSet {
    fn new(cfg: &RunConfig, data: &Dataset, seed: u64) -> Result<Self> {
        let split = split_dataset(&data.contracts, seed)?;
        let mut groups: BTreeMap<Bucket, (Vec<OptionContract>, Vec<PricingInput>)> = BTreeMap::new();
        let inputs = data.inputs(&split.test, cfg.finetune.time_steps, cfg.rate)?;
        for (c, i) in split.test.into_iter().zip(inputs) {
            let g = groups.entry((c.class(), c.kind)).or_default();
            g.0.push(c);
            g.1.push(i);
        }
        Ok(TestSet { groups })
    }
}

/// Test-split contracts and their model prices, bucket by bucket.
fn price_seed(cfg: &RunConfig, data: &Dataset, seed: u64) -> Result<(Vec<OptionContract>, Vec<f64>)> {
    let test = TestSet::new(cfg, data, seed)?;
    let mut contracts = Vec::new();
    let mut prices = Vec::new();
    for ((class, kind), (cs, inputs)) in &test.groups {
        let model = model_for(cfg, seed, *class, *kind)?;
        prices.extend(predict_prices(&model.value, &model.value_params, inputs, None)?);
        contracts.extend(cs.iter().cloned());
    }
    Ok((contracts, prices))
}

/// Writes `seed_<s>/predictions.csv` for the test split of every seed.
pub fn cmd_price(cfg: &RunConfig) -> Result<()> {
    let data = Dataset::load(cfg)?;
    for &seed in &cfg.seeds {
        let (cs, prices) = price_seed(cfg, &data, seed)?;
        write_predictions(&cfg.seed_dir(seed).join("predictions.csv"), &cs, &prices)?;
    }
    Ok(())
}

/// Per seed: predictions, bucket report and extreme-error shares on the
/// test split. Across seeds: `report_summary.csv` with seed means.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Vec<Vec<BucketReport>>> {
    let data = Dataset::load(cfg)?;
    let mut all = Vec::new();
    for &seed in &cfg.seeds {
        let dir = cfg.seed_dir(seed);
        let (cs, prices) = price_seed(cfg, &data, seed)?;
        write_predictions(&dir.join("predictions.csv"), &cs, &prices)?;
        let reports = report_by_bucket(&cs, &prices)?;
        write_report(&dir.join("report.csv"), &reports)?;
        write_extreme(&dir.join("extreme.csv"), &reports)?;
        if let Some(m) = reports.last().and_then(|r| r.metrics) {
            info!("seed {seed}: test MAE {:.4}, MAPE {:.2}%", m.mae, m.mape);
        }
        all.push(reports);
    }
    write_summary(&cfg.out.join("report_summary.csv"), &all)?;
    Ok(all)
}

fn mean(v: impl Iterator<Item = f64>) -> String {
    let v: Vec<f64> = v.collect();
    if v.is_empty() {
        String::new()
    } else {
        (v.iter().sum::<f64>() / v.len() as f64).to_string()
    }
}

/// Columns: bucket, seeds, mae, rmse, mape, r2 (means over the seeds where
/// the bucket is non-empty).
fn write_summary(path: &Path, per_seed: &[Vec<BucketReport>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(gprice::Error::from)?;
    w.write_record(["bucket", "seeds", "mae", "rmse", "mape", "r2"])
        .map_err(gprice::Error::from)?;
    let Some(first) = per_seed.first() else { return Ok(()) };
    for (i, b) in first.iter().enumerate() {
        let ms: Vec<_> = per_seed.iter().filter_map(|r| r[i].metrics).collect();
        w.write_record([
            b.bucket.clone(),
            ms.len().to_string(),
            mean(ms.iter().map(|m| m.mae)),
            mean(ms.iter().map(|m| m.rmse)),
            mean(ms.iter().map(|m| m.mape)),
            mean(ms.iter().filter_map(|m| m.r2)),
        ])
        .map_err(gprice::Error::from)?;
    }
    w.flush().map_err(|e| gprice::Error::io(path, e))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per seed `attribution.csv` (bucket, method, rv_share, sent_share,
/// total_gain, completeness_gap) and, for Shapley, `ablation.csv` with the
/// four ablation MAEs and both φ values.
pub fn cmd_attribute(cfg: &RunConfig, methods: &[AttributionMethod]) -> Result<()> {
    let data = Dataset::load(cfg)?;
    for &seed in &cfg.seeds {
        let dir = cfg.seed_dir(seed);
        let test = TestSet::new(cfg, &data, seed)?;
        let path = dir.join("attribution.csv");
        let mut attr = csv::Writer::from_path(&path).map_err(gprice::Error::from)?;
        attr.write_record(["bucket", "method", "rv_share", "sent_share", "total_gain", "completeness_gap"])
            .map_err(gprice::Error::from)?;
        let mut ablation = if methods.contains(&AttributionMethod::Shapley) {
            let mut w = csv::Writer::from_path(dir.join("ablation.csv")).map_err(gprice::Error::from)?;
            w.write_record(["bucket", "e_none", "e_rv", "e_sent", "e_full", "phi_rv", "phi_sent"])
                .map_err(gprice::Error::from)?;
            Some(w)
        } else {
            None
        };
        for (class, kind) in finetune_buckets() {
            let Some((_, inputs)) = test.groups.get(&(class, kind)) else { continue };
            let bucket = format!("{}_{}", class.name().to_lowercase(), kind.name());
            let model = model_for(cfg, seed, class, kind)?;
            let (arch, params) = (&model.value, &model.value_params);
            for &method in methods {
                let row = match method {
                    AttributionMethod::Shapley => {
                        let e: Vec<f64> = AblationConfig::ALL
                            .iter()
                            .map(|&a| evaluate_ablation(arch, params, inputs, a))
                            .collect::<gprice::Result<_>>()?;
                        let s = shapley_two_player(e[0], e[1], e[2], e[3]);
                        if let Some(w) = ablation.as_mut() {
                            let mut r = vec![bucket.clone()];
                            r.extend(e.iter().chain([&s.phi_rv, &s.phi_sent]).map(|v| v.to_string()));
                            w.write_record(&r).map_err(gprice::Error::from)?;
                        }
                        [
                            "shapley".to_string(),
                            opt(s.shares.map(|s| s.0)),
                            opt(s.shares.map(|s| s.1)),
                            s.total_gain.to_string(),
                            String::new(),
                        ]
                    }
                    AttributionMethod::Ig => {
                        let gate = params[arch.gate_index()];
                        let (mut rv, mut sent, mut gap) = (0.0, 0.0, 0.0);
                        for c in inputs {
                            let view = PriceView::new(arch, params, c);
                            let groups = [
                                FeatureGroup { name: "rv".into(), features: 0..1 },
                                FeatureGroup { name: "sent".into(), features: 1..view.dim() },
                            ];
                            let x = view.point(c.sigma_steps[0], gate);
                            let base = view.point(gprice::xai::CONSTANT_SIGMA, 0.0);
                            let r = integrated_gradients(&view, &x, &base, cfg.ig_steps, &groups)?;
                            rv += r.group_attributions[0].abs();
                            sent += r.group_attributions[1].abs();
                            gap += r.completeness_gap;
                        }
                        let total = rv + sent;
                        let share = |v: f64| (total > 0.0).then(|| v / total);
                        [
                            "ig".to_string(),
                            opt(share(rv)),
                            opt(share(sent)),
                            String::new(),
                            (gap / inputs.len() as f64).to_string(),
                        ]
                    }
                };
                let mut r = vec![bucket.clone()];
                r.extend(row);
                attr.write_record(&r).map_err(gprice::Error::from)?;
            }
        }
        attr.flush().map_err(|e| gprice::Error::io(&path, e))?;
        if let Some(mut w) = ablation {
            w.flush().map_err(|e| gprice::Error::io(&dir, e))?;
        }
    }
    Ok(())
}
