//! Layer-freeze pre-training on Sonar (60 -> 500 -> 250 -> 2 -> 250 -> 500 -> 60):
//! prints the stage plan, checks that earlier stages stay frozen, then
//! compares fine-tuned training loss with and without pre-training.
//!
//!     cargo run --release --example layer_freeze_pretraining

use std::path::Path;

use centroid_encoder::dataset::{load_csv, standardize, CsvOptions};
use centroid_encoder::network::ModelParams;
use centroid_encoder::training::{fit, presets, pretrain_layer_freeze_observed, stage_plan, Stage, TrainConfig};

fn main() -> centroid_encoder::Result<()> {
    env_logger::init();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sonar.csv");
    let raw = load_csv(path, &CsvOptions::default())?;
    let all: Vec<usize> = (0..raw.n_samples()).collect();
    let (ds, _) = standardize(&raw, &all)?;
    let spec = presets::SONAR.spec(ds.n_features())?;

    for stage in stage_plan(&spec)? {
        println!(
            "stage {}: widths {:?}, trains layers {:?}",
            stage.index,
            stage.spec.widths(),
            stage.trainable
        );
    }

    let cfg = presets::SONAR.train_config(TrainConfig {
        max_epochs: 60,
        early_stopping: false,
        pretrain_epochs: 10,
        ..TrainConfig::default()
    });

    // Frozen layers of each stage, as first seen in that stage.
    let mut snapshot: Option<(usize, ModelParams)> = None;
    let mut updates = 0usize;
    let mut violations = 0usize;
    pretrain_layer_freeze_observed(&ds, &spec, &cfg, &mut |stage: &Stage, p: &ModelParams| {
        updates += 1;
        match &snapshot {
            Some((k, first)) if *k == stage.index => {
                for (now, then) in p.layers.iter().zip(&first.layers).filter(|(l, _)| l.frozen) {
                    if now.weights != then.weights || now.bias != then.bias {
                        violations += 1;
                    }
                }
            }
            _ => snapshot = Some((stage.index, p.clone())),
        }
    })?;
    println!("{updates} pre-training updates, {violations} changes to frozen layers");

    for pretrain in [false, true] {
        let (_, report) = fit(&ds, &spec, &TrainConfig { pretrain, ..cfg.clone() })?;
        println!(
            "pretrain = {pretrain:<5}: stage losses {:?}, final loss {:.5}",
            report.pretrain_loss.iter().map(|l| format!("{l:.4}")).collect::<Vec<_>>(),
            report.final_loss().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
