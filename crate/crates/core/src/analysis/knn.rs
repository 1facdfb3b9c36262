use rayon::prelude::*;

use crate::dataset::squared_distance;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// k-nearest-neighbour majority vote under the Euclidean metric.
///
/// Neighbours are ranked by distance, then by training index. A tied vote
/// goes to whichever of the tied classes owns the nearest of the `k`
/// neighbours.
pub fn knn_predict(train_points: &Matrix, train_labels: &[usize], queries: &Matrix, k: usize) -> Result<Vec<usize>> {
    let n = train_points.rows();
    if n == 0 {
        return Err(Error::contract("k-NN needs at least one training point"));
    }
    if train_labels.len() != n {
        return Err(Error::contract(format!("{} labels for {n} training points", train_labels.len())));
    }
    if k == 0 || k > n {
        return Err(Error::config("k", format!("k = {k} must lie in 1..={n}")));
    }
    if queries.cols() != train_points.cols() {
        return Err(Error::contract(format!(
            "queries have {} coordinates, training points {}",
            queries.cols(),
            train_points.cols()
        )));
    }
    if !train_points.is_finite() || !queries.is_finite() {
        return Err(Error::Numeric("non-finite coordinates in k-NN input".into()));
    }
    let n_classes = train_labels.iter().max().map_or(0, |&m| m + 1);
    let predictions = (0..queries.rows())
        .into_par_iter()
        .map(|q| vote(train_points, train_labels, queries.row(q), k, n_classes))
        .collect();
    Ok(predictions)
}

fn vote(train: &Matrix, labels: &[usize], query: &[f64], k: usize, n_classes: usize) -> usize {
    let mut ranked: Vec<(f64, usize)> = train
        .row_iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(p, query), i))
        .collect();
    let by_rank = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, by_rank);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(by_rank);
    let mut counts = vec![0usize; n_classes];
    for &(_, i) in &ranked {
        counts[labels[i]] += 1;
    }
    let top = *counts.iter().max().expect("k >= 1");
    ranked
        .iter()
        .map(|&(_, i)| labels[i])
        .find(|&c| counts[c] == top)
        .expect("some neighbour belongs to a top class")
}
