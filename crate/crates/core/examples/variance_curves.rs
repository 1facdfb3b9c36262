//! Cumulative explained variance of two MNIST digit pairs: {0, 1} puts
//! about 41% of its variance in the first two principal directions, {4, 9}
//! about 22%.
//!
//!     cargo run --release --example variance_curves -- [out.svg]

use std::path::Path;

use centroid_encoder::analysis::{pca_fit, variance_curve, variance_svg};
use centroid_encoder::dataset::load_idx;

fn main() -> centroid_encoder::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let train = load_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))?;
    let mut curves = Vec::new();
    for pair in [["0", "1"], ["4", "9"]] {
        let subset = train.filter_classes(&pair)?;
        let curve = variance_curve(&pca_fit(subset.x())?, 20)?;
        println!(
            "digits {{{}, {}}}: {} images, d=1 {:.4}, d=2 {:.4}, d=10 {:.4}",
            pair[0],
            pair[1],
            subset.n_samples(),
            curve[0],
            curve[1],
            curve[9]
        );
        curves.push((format!("{}/{}", pair[0], pair[1]), curve));
    }
    if let Some(out) = std::env::args().nth(1) {
        let refs: Vec<(&str, &[f64])> = curves.iter().map(|(n, c)| (n.as_str(), c.as_slice())).collect();
        std::fs::write(&out, variance_svg(&refs)?).map_err(|e| centroid_encoder::Error::Io {
            context: format!("writing {out}"),
            source: e,
        })?;
    }
    Ok(())
}
