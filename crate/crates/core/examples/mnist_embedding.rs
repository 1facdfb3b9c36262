//! 2-D centroid-encoder embedding of a 1000-per-class MNIST subset, scored
//! on the 10,000-image test set and drawn over the Voronoi cells of the
//! training class centroids.
//!
//!     scripts/fetch_mnist.sh
//!     cargo run --release --example mnist_embedding -- [out_dir]

use std::path::{Path, PathBuf};

use centroid_encoder::analysis::{embedding_csv, embedding_svg, evaluate, voronoi_sites, Embedding};
use centroid_encoder::dataset::load_idx;
use centroid_encoder::training::{fit, presets, TrainConfig};
use centroid_encoder::SeededRng;

fn main() -> centroid_encoder::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/mnist".into()));
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let full = load_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))?;
    let test = load_idx(dir.join("t10k-images-idx3-ubyte"), dir.join("t10k-labels-idx1-ubyte"))?;
    let train = full.sample_per_class(1000, &mut SeededRng::new(7));

    let spec = presets::MNIST.spec(784)?;
    let cfg = TrainConfig {
        batch_size: 128,
        max_epochs: 60,
        ..presets::MNIST.train_config(TrainConfig::default())
    };
    let (params, report) = fit(&train, &spec, &cfg)?;
    let reference = Embedding::of(&params, &spec, &train)?;
    let queries = Embedding::of(&params, &spec, &test)?;
    let eval = evaluate(&reference, &queries, 5)?;
    println!(
        "best epoch {}, {} epochs, {:.0}s: test error {:.2}%",
        report.best_epoch, report.epochs_run, report.wall_seconds, eval.error_percent
    );

    std::fs::create_dir_all(&out).map_err(|e| centroid_encoder::Error::Io {
        context: format!("creating {}", out.display()),
        source: e,
    })?;
    let names = train.class_names().to_vec();
    let sites = voronoi_sites(&reference)?;
    let write = |name: &str, text: String| {
        std::fs::write(out.join(name), text).map_err(|e| centroid_encoder::Error::Io {
            context: format!("writing {name}"),
            source: e,
        })
    };
    write("embedding_test.csv", embedding_csv(&queries, &names)?)?;
    write("embedding_test.svg", embedding_svg(&queries, &names, Some(&sites))?)?;
    write("train_log.tsv", report.to_tsv())?;
    println!("wrote {}", out.display());
    Ok(())
}
