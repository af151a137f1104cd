use std::path::PathBuf;

use gprice::features::{split_dataset, MoneynessClass};
use gprice::nets::PricingModel;
use gprice::trainer::{run_stage, write_trace, GatePolicy, Stage, StageSpec, TrainConfig};
use gprice::OptionKind;
use log::{info, warn};

use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::Result;

/// Which stages `train` runs. Finetuning alone resumes from the saved
/// pretrain checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStages {
    Both,
    Only(Stage),
}

/// The six (class, side) finetuning buckets in a fixed order.
pub fn finetune_buckets() -> impl Iterator<Item = (MoneynessClass, OptionKind)> {
    MoneynessClass::ALL
        .into_iter()
        .flat_map(|c| [OptionKind::Call, OptionKind::Put].map(move |k| (c, k)))
}

fn pretrain_path(cfg: &RunConfig, seed: u64) -> PathBuf {
    cfg.seed_dir(seed).join("pretrain.ckpt")
}

fn finetune_name(class: MoneynessClass, kind: OptionKind) -> String {
    StageSpec::finetune(class, kind).name()
}

/// The checkpoint that prices contracts of this bucket: its finetuned model
/// when one was trained, the pretrained model otherwise.
pub fn model_for(cfg: &RunConfig, seed: u64, class: MoneynessClass, kind: OptionKind) -> Result<PricingModel> {
    let ft = cfg.seed_dir(seed).join(format!("{}.ckpt", finetune_name(class, kind)));
    if ft.is_file() {
        return Ok(PricingModel::load(&ft)?);
    }
    let pre = pretrain_path(cfg, seed);
    if !pre.is_file() {
        return Err(gprice::Error::Data(format!(
            "no checkpoint for seed {seed}; run `train` first ({} missing)",
            pre.display()
        ))
        .into());
    }
    Ok(PricingModel::load(&pre)?)
}

fn stage_cfg(base: &TrainConfig, seed: u64) -> TrainConfig {
    TrainConfig { seed, ..base.clone() }
}

/// Pretrain then finetune every bucket, for each configured seed.
///
/// Per seed: `seed_<s>/pretrain.ckpt`, `seed_<s>/finetune_<class>_<side>.ckpt`
/// and a `trace_<stage>.csv` loss trace next to each checkpoint.
pub fn cmd_train(cfg: &RunConfig, stages: TrainStages) -> Result<()> {
    let data = Dataset::load(cfg)?;
    for &seed in &cfg.seeds {
        let dir = cfg.seed_dir(seed);
        let split = split_dataset(&data.contracts, seed)?;
        info!(
            "seed {seed}: {} train / {} validation / {} test contracts",
            split.train.len(),
            split.val.len(),
            split.test.len()
        );
        let pre_path = pretrain_path(cfg, seed);
        let pretrained = if stages == TrainStages::Only(Stage::Finetune) {
            PricingModel::load(&pre_path)?
        } else {
            let mut model = PricingModel::new(cfg.value.clone(), cfg.generator.clone(), seed, 0.0)?;
            let tc = stage_cfg(&cfg.pretrain, seed);
            let inputs = data.inputs(&split.train, tc.time_steps, cfg.rate)?;
            let trace = run_stage(&StageSpec::pretrain(), &tc, &inputs, &mut model)?;
            model.save(&pre_path)?;
            write_trace(&dir.join("trace_pretrain.csv"), &trace)?;
            model
        };
        if stages == TrainStages::Only(Stage::Pretrain) {
            continue;
        }
        let tc = stage_cfg(&cfg.finetune, seed);
        let inputs = data.inputs(&split.train, tc.time_steps, cfg.rate)?;
        for (class, kind) in finetune_buckets() {
            let mut spec = StageSpec::finetune(class, kind);
            if !cfg.sentiment {
                spec.gate_policy = GatePolicy::FrozenZero;
            }
            let name = spec.name();
            if !inputs.iter().any(|c| spec.accepts(c)) {
                warn!("seed {seed}: no training contracts for {name}; the pretrained model prices this bucket");
                continue;
            }
            let mut model = pretrained.clone();
            let trace = run_stage(&spec, &tc, &inputs, &mut model)?;
            model.save(&dir.join(format!("{name}.ckpt")))?;
            write_trace(&dir.join(format!("trace_{name}.csv")), &trace)?;
        }
    }
    Ok(())
}
