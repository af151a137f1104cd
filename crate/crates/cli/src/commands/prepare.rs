use std::fs::File;
use std::io::BufWriter;

use gprice::features::{
    feature_names, write_feature_manifest, write_guba, write_options, write_rv_forecast,
    MoneynessClass,
};
use gprice::market::{bsm_sweep, SweepRow};
use gprice::synthetic::generate;
use log::info;

use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::Result;

/// Writes a synthetic `options.csv`, `rv_forecast.csv` and
/// `guba_daily.csv` into the output directory.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let data = generate(&cfg.simulate)?;
    write_options(&cfg.out.join("options.csv"), &data.contracts)?;
    write_rv_forecast(&cfg.out.join("rv_forecast.csv"), &data.forecast)?;
    write_guba(&cfg.out.join("guba_daily.csv"), &data.forum)?;
    info!("simulated {} contracts into {}", data.contracts.len(), cfg.out.display());
    Ok(())
}

/// Writes `features.csv` (one row per pricing date and class) and the
/// feature manifest.
pub fn cmd_features(cfg: &RunConfig) -> Result<()> {
    let data = Dataset::load(cfg)?;
    let path = cfg.out.join("features.csv");
    std::fs::create_dir_all(&cfg.out).map_err(|e| gprice::Error::io(&cfg.out, e))?;
    let mut w = csv_writer(&path)?;
    let mut header = vec!["date".to_string(), "class".to_string()];
    header.extend((0..5).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(gprice::Error::from)?;
    let mut seen = std::collections::BTreeSet::new();
    for c in &data.contracts {
        if seen.insert((c.date, c.class())) {
            let mut row = vec![c.date.format("%Y-%m-%d").to_string(), c.class().name().to_string()];
            row.extend(data.sentiment(c).iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(gprice::Error::from)?;
        }
    }
    w.flush().map_err(|e| gprice::Error::io(&path, e))?;
    write_feature_manifest(&cfg.out.join("feature_manifest.csv"))?;
    for class in MoneynessClass::ALL {
        info!("{} features: {}", class.name(), feature_names(class).join(", "));
    }
    Ok(())
}

/// Per-month BSM error for each volatility on the grid (`bsm_sweep.csv`).
pub fn cmd_bsm_sweep(cfg: &RunConfig) -> Result<()> {
    if !cfg.options.is_file() {
        return Err(gprice::Error::Data(format!("input file {} does not exist", cfg.options.display())).into());
    }
    let contracts = gprice::features::read_options(&cfg.options)?;
    let rows: Vec<SweepRow> = contracts
        .iter()
        .map(|c| SweepRow {
            month: c.month(),
            x: c.underlying,
            k: c.strike,
            tau: c.tau(),
            kind: c.kind,
            label: c.label,
        })
        .collect();
    let table = bsm_sweep(&rows, &cfg.sweep_grid, cfg.rate);
    let path = cfg.out.join("bsm_sweep.csv");
    std::fs::create_dir_all(&cfg.out).map_err(|e| gprice::Error::io(&cfg.out, e))?;
    let file = File::create(&path).map_err(|e| gprice::Error::io(&path, e))?;
    table.write_csv(BufWriter::new(file))?;
    Ok(())
}

fn csv_writer(path: &std::path::Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path).map_err(gprice::Error::from)?)
}
