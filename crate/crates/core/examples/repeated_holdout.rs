//! 25 repeats of a 70:30 stratified split on Iris or Sonar with the preset
//! topology, reporting mean and spread of the k-NN(5) error.
//!
//!     cargo run --release --example repeated_holdout -- sonar [repeats]

use std::path::Path;

use centroid_encoder::analysis::{repeated_holdout, HoldoutOptions};
use centroid_encoder::dataset::{load_csv, CsvOptions};
use centroid_encoder::training::{presets, TrainConfig};

fn main() -> centroid_encoder::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "iris".into());
    let repeats: usize = args.next().map_or(25, |s| s.parse().expect("repeats must be an integer"));
    let preset = presets::lookup(&name).expect("unknown dataset; try iris or sonar");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/{}.csv", name.to_lowercase()));
    let ds = load_csv(path, &CsvOptions::default())?;
    println!("{}: {} samples, {} features, {} classes", preset.name, ds.n_samples(), ds.n_features(), ds.n_classes());

    let spec = preset.spec(ds.n_features())?;
    let cfg = preset.train_config(TrainConfig {
        max_epochs: 300,
        ..TrainConfig::default()
    });
    let opts = HoldoutOptions {
        repeats,
        ..HoldoutOptions::default()
    };
    let t = std::time::Instant::now();
    let summary = repeated_holdout(&ds, &spec, &cfg, &opts)?;
    for (r, e) in summary.errors.iter().enumerate() {
        println!("repeat {:>2}: {e:.2}%", r + 1);
    }
    println!(
        "error {:.2} ± {:.2}% over {repeats} repeats in {:.1}s",
        summary.mean,
        summary.std,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
