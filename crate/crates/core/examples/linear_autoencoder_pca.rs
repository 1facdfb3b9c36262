//! A linear autoencoder with a 2-wide bottleneck recovers the top-2
//! principal subspace: the principal angles between its encoder's column
//! space and the leading PCA directions shrink towards zero as it trains.
//!
//!     cargo run --release --example linear_autoencoder_pca

use centroid_encoder::analysis::{pca_fit, principal_angles};
use centroid_encoder::dataset::Dataset;
use centroid_encoder::network::{init_params, Activation, NetworkSpec};
use centroid_encoder::training::{fit_from, Mode, TrainConfig};
use centroid_encoder::{Matrix, SeededRng};

fn main() -> centroid_encoder::Result<()> {
    let mut rng = SeededRng::new(17);
    // Anisotropic cloud: axis scales 5, 3, 1, ... mixed by a random rotation.
    let scales = [5.0, 3.0, 1.0, 0.8, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];
    let latent = Matrix::from_fn(100, 10, |_, j| scales[j] * rng.normal());
    let mixing = centroid_encoder::analysis::orthonormal_basis(&Matrix::new(10, 10, rng.uniform(-1.0, 1.0, 100))?)?;
    let x = latent.matmul(&mixing)?;
    let ds = Dataset::new(x.clone(), vec![0; 100])?;

    let pca = pca_fit(&x)?;
    let top2 = pca.components.leading_columns(2);

    let spec = NetworkSpec::bottleneck(10, &[], 2, Activation::Identity)?;
    let mut params = init_params(&spec, &mut SeededRng::new(1));
    let cfg = TrainConfig {
        mode: Mode::Autoencoder,
        learning_rate: 0.01,
        batch_size: 100,
        weight_decay: 0.0,
        max_epochs: 500,
        early_stopping: false,
        ..TrainConfig::default()
    };
    for round in 1..=6 {
        let (next, report) = fit_from(&ds, &spec, &cfg, params)?;
        params = next;
        let angles = principal_angles(&params.layers[0].weights, &top2)?;
        println!(
            "epoch {:>3}: loss {:.5}, principal angles {:.3}° {:.3}°",
            round * cfg.max_epochs,
            report.final_loss().unwrap_or(f64::NAN),
            angles[0].to_degrees(),
            angles[1].to_degrees()
        );
    }
    Ok(())
}
