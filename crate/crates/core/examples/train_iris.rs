//! Fits a 4 -> 100 -> 2 -> 100 -> 4 centroid-encoder on Iris, prints the
//! training log and the k-NN error of a held-out 30%, and round-trips the
//! model through its binary container.
//!
//!     cargo run --release --example train_iris [-- seed]

use std::path::Path;

use centroid_encoder::analysis::{evaluate, Embedding};
use centroid_encoder::dataset::{load_csv, standardize, stratified_split, CsvOptions};
use centroid_encoder::network::{decode_model, encode_model, SavedModel};
use centroid_encoder::training::{fit, presets, TrainConfig};
use centroid_encoder::SeededRng;

fn main() -> centroid_encoder::Result<()> {
    env_logger::init();
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed must be an integer"));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    let ds = load_csv(path, &CsvOptions::default())?;

    let split = stratified_split(&ds, 0.3, &mut SeededRng::new(seed))?;
    let (z, standardizer) = standardize(&ds, &split.train)?;
    let (train, test) = (z.subset(&split.train), z.subset(&split.test));

    let spec = presets::IRIS.spec(ds.n_features())?;
    let cfg = presets::IRIS.train_config(TrainConfig {
        seed,
        max_epochs: 300,
        ..TrainConfig::default()
    });
    let (params, report) = fit(&train, &spec, &cfg)?;
    print!("{}", report.to_tsv());

    let err = evaluate(
        &Embedding::of(&params, &spec, &train)?,
        &Embedding::of(&params, &spec, &test)?,
        5,
    )?;
    println!(
        "best epoch {}, test error {:.2}% on {} samples",
        report.best_epoch,
        err.error_percent,
        test.n_samples()
    );
    for c in &err.per_class {
        println!("  {:<16} {:>5.1}%", ds.class_names()[c.class], c.error_percent());
    }

    let model = SavedModel {
        spec,
        params,
        standardizer: Some(standardizer),
    };
    let bytes = encode_model(&model)?;
    assert_eq!(decode_model(&bytes, Path::new("<memory>"))?, model);
    println!("model container: {} bytes, {} parameters", bytes.len(), model.spec.parameter_count());
    Ok(())
}
