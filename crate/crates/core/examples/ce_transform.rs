//! Trains a square 784 -> [784] -> 784 tanh centroid-encoder on MNIST
//! digits {4, 9} and compares how much variance the first principal
//! directions hold before and after the transform.
//!
//! Weight decay is set high (2e-2): it is what squeezes the within-class
//! spread out of the hidden layer.
//!
//!     cargo run --release --example ce_transform -- [epochs] [weight_decay]

use std::path::Path;

use centroid_encoder::analysis::ce_transform_experiment;
use centroid_encoder::dataset::load_idx;
use centroid_encoder::training::TrainConfig;

fn main() -> centroid_encoder::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let epochs: usize = std::env::args().nth(1).map_or(15, |s| s.parse().expect("epochs must be an integer"));
    let weight_decay: f64 = std::env::args().nth(2).map_or(2e-2, |s| s.parse().expect("weight decay must be a number"));
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let pair = ["4", "9"];
    let train = load_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))?.filter_classes(&pair)?;
    let test = load_idx(dir.join("t10k-images-idx3-ubyte"), dir.join("t10k-labels-idx1-ubyte"))?.filter_classes(&pair)?;
    let cfg = TrainConfig {
        max_epochs: epochs,
        weight_decay,
        ..TrainConfig::default()
    };
    let r = ce_transform_experiment(&train, &test, &cfg, 10)?;
    println!("{:>3} {:>9} {:>9} {:>9} {:>9}", "d", "raw", "ce", "raw test", "ce test");
    for d in 0..r.raw_train.len() {
        println!(
            "{:>3} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            d + 1,
            r.raw_train[d],
            r.transformed_train[d],
            r.raw_test[d],
            r.transformed_test[d]
        );
    }
    println!("trained {} epochs in {:.0}s", r.fit.epochs_run, r.fit.wall_seconds);
    Ok(())
}
