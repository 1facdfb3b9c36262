//! Exhaustive k-NN on three Gaussian clouds, with the error as k grows.
//!
//!     cargo run --release --example knn_classify

use centroid_encoder::analysis::{knn_predict, prediction_error};
use centroid_encoder::{Matrix, SeededRng};

fn clouds(n: usize, spread: f64, rng: &mut SeededRng) -> (Matrix, Vec<usize>) {
    let centres = [[0.0, 0.0], [3.0, 0.0], [1.5, 2.5]];
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let x = Matrix::from_fn(n, 2, |i, j| centres[labels[i]][j] + spread * rng.normal());
    (x, labels)
}

fn main() -> centroid_encoder::Result<()> {
    let mut rng = SeededRng::new(5);
    let (train, train_labels) = clouds(300, 1.0, &mut rng);
    let (test, test_labels) = clouds(3000, 1.0, &mut rng);
    for k in [1, 3, 5, 9, 15, 31] {
        let predicted = knn_predict(&train, &train_labels, &test, k)?;
        println!("k = {k:>2}: error {:.2}%", prediction_error(&test_labels, &predicted)?);
    }
    Ok(())
}
