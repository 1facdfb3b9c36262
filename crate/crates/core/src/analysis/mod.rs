//! PCA and explained variance, k-NN prediction error, repeated hold-out
//! evaluation, Voronoi sites, plots.

mod ce_transform;
mod export;
mod holdout;
mod knn;
mod subspace;

pub use ce_transform::{ce_transform, ce_transform_experiment, CeTransformReport};
pub use export::{class_color, embedding_csv, embedding_svg, variance_csv, variance_svg};
pub use holdout::{repeated_holdout, split_seed, train_and_score, train_seed, EvalSummary, HoldoutOptions};
pub use knn::knn_predict;
pub use subspace::{orthonormal_basis, principal_angles};

use crate::dataset::{CentroidSet, Dataset};
use crate::error::{Error, Result};
use crate::network::{encode, ModelParams, NetworkSpec};
use crate::numerics::{sym_eig, Matrix};

/// Principal components of a sample matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal directions as columns, ordered like `eigenvalues`.
    pub components: Matrix,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

/// Eigen-decomposes the sample covariance (divisor `N - 1`).
pub fn pca_fit(x: &Matrix) -> Result<PcaModel> {
    if x.rows() < 2 {
        return Err(Error::Data(format!("PCA needs at least 2 samples, got {}", x.rows())));
    }
    let mean = x.column_means();
    let mut centered = x.clone();
    let neg: Vec<f64> = mean.iter().map(|m| -m).collect();
    centered.add_row_vector(&neg);
    let cov = centered.t_matmul(&centered)?.scale(1.0 / (x.rows() - 1) as f64);
    let eig = sym_eig(&cov)?;
    Ok(PcaModel {
        mean,
        components: eig.vectors,
        eigenvalues: eig.values,
    })
}

impl PcaModel {
    /// Coordinates of `x` along the leading `dims` components.
    pub fn project(&self, x: &Matrix, dims: usize) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::contract(format!(
                "PCA fitted on {} features, data has {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let dims = dims.min(self.components.cols());
        let mut centered = x.clone();
        let neg: Vec<f64> = self.mean.iter().map(|m| -m).collect();
        centered.add_row_vector(&neg);
        centered.matmul(&self.components.leading_columns(dims))
    }
}

/// Cumulative explained-variance fractions for `d = 1..=up_to`.
///
/// Eigenvalues below zero (round-off) count as zero; the entry at `d = n`
/// is exactly 1.
pub fn variance_curve(model: &PcaModel, up_to: usize) -> Result<Vec<f64>> {
    let n = model.eigenvalues.len();
    if up_to > n {
        return Err(Error::contract(format!("curve up to {up_to} of only {n} dimensions")));
    }
    let lambdas: Vec<f64> = model.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = lambdas.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numeric("data has zero total variance".into()));
    }
    let mut acc = 0.0;
    Ok(lambdas[..up_to]
        .iter()
        .map(|&l| {
            acc += l;
            acc / total
        })
        .collect())
}

/// Bottleneck coordinates with their class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub points: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Embedding {
    pub fn new(points: Matrix, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if labels.len() != points.rows() {
            return Err(Error::contract(format!("{} labels for {} points", labels.len(), points.rows())));
        }
        if labels.iter().any(|&l| l >= n_classes) {
            return Err(Error::contract("label outside the class range"));
        }
        Ok(Self {
            points,
            labels,
            n_classes,
        })
    }

    /// Encodes `ds` with the network's bottleneck.
    pub fn of(params: &ModelParams, spec: &NetworkSpec, ds: &Dataset) -> Result<Self> {
        if ds.n_features() != spec.input_dim() {
            return Err(Error::Data(format!(
                "data has {} features, model expects {}",
                ds.n_features(),
                spec.input_dim()
            )));
        }
        Self::new(encode(params, spec, ds.x())?, ds.labels().to_vec(), ds.n_classes())
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

/// `100 / N` times the number of mismatches.
pub fn prediction_error(true_labels: &[usize], predicted: &[usize]) -> Result<f64> {
    if true_labels.len() != predicted.len() {
        return Err(Error::contract(format!(
            "{} true labels against {} predictions",
            true_labels.len(),
            predicted.len()
        )));
    }
    if true_labels.is_empty() {
        return Err(Error::contract("prediction error of an empty set"));
    }
    let wrong = true_labels.iter().zip(predicted).filter(|(t, p)| t != p).count();
    Ok(100.0 * wrong as f64 / true_labels.len() as f64)
}

pub fn accuracy(true_labels: &[usize], predicted: &[usize]) -> Result<f64> {
    Ok(100.0 - prediction_error(true_labels, predicted)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassError {
    pub class: usize,
    pub samples: usize,
    pub errors: usize,
}

impl ClassError {
    pub fn error_percent(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            100.0 * self.errors as f64 / self.samples as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub error_percent: f64,
    pub per_class: Vec<ClassError>,
    pub k: usize,
}

/// k-NN prediction error of `test` against reference points `train`.
pub fn evaluate(train: &Embedding, test: &Embedding, k: usize) -> Result<EvalReport> {
    let predicted = knn_predict(&train.points, &train.labels, &test.points, k)?;
    let error_percent = prediction_error(&test.labels, &predicted)?;
    let n_classes = train.n_classes.max(test.n_classes);
    let mut per_class: Vec<ClassError> = (0..n_classes)
        .map(|class| ClassError {
            class,
            samples: 0,
            errors: 0,
        })
        .collect();
    for (&t, &p) in test.labels.iter().zip(&predicted) {
        per_class[t].samples += 1;
        if t != p {
            per_class[t].errors += 1;
        }
    }
    Ok(EvalReport {
        error_percent,
        per_class,
        k,
    })
}

/// Per-class means of the embedded training points.
pub fn voronoi_sites(train: &Embedding) -> Result<CentroidSet> {
    if train.is_empty() {
        return Err(Error::Data("no embedded points to place sites".into()));
    }
    CentroidSet::from_rows(&train.points, &train.labels, train.n_classes)
}

/// Class whose site is nearest to each point.
pub fn voronoi_assign(sites: &CentroidSet, points: &Matrix) -> Result<Vec<usize>> {
    if points.cols() != sites.dim() {
        return Err(Error::contract(format!(
            "points have {} coordinates, sites {}",
            points.cols(),
            sites.dim()
        )));
    }
    Ok(points.row_iter().map(|p| sites.nearest(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    #[test]
    fn line_data_is_rank_one() {
        let x = Matrix::from_fn(20, 2, |i, j| i as f64 * if j == 0 { 1.0 } else { 2.0 });
        let c = variance_curve(&pca_fit(&x).unwrap(), 2).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert_eq!(c[1], 1.0);
    }

    #[test]
    fn isotropic_gaussian_splits_evenly() {
        let mut rng = SeededRng::new(21);
        let x = Matrix::from_fn(10_000, 2, |_, _| rng.normal());
        let c = variance_curve(&pca_fit(&x).unwrap(), 1).unwrap();
        assert!((c[0] - 0.5).abs() < 0.02, "{}", c[0]);
    }

    #[test]
    fn full_projection_reconstructs() {
        let mut rng = SeededRng::new(3);
        let x = Matrix::new(15, 4, rng.uniform(-3.0, 3.0, 60)).unwrap();
        let pca = pca_fit(&x).unwrap();
        let z = pca.project(&x, 4).unwrap();
        let mut back = z.matmul_t(&pca.components).unwrap();
        back.add_row_vector(&pca.mean);
        assert!(back.max_abs_diff(&x).unwrap() < 1e-8);
    }

    #[test]
    fn diagonal_covariance_curve() {
        let pca = PcaModel {
            mean: vec![0.0; 2],
            components: Matrix::identity(2),
            eigenvalues: vec![3.0, 1.0],
        };
        assert_eq!(variance_curve(&pca, 2).unwrap(), vec![0.75, 1.0]);
        assert!(variance_curve(&pca, 3).is_err());
    }

    #[test]
    fn error_arithmetic() {
        assert_eq!(prediction_error(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(prediction_error(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 25.0);
        let t = [0, 1, 2, 0, 1, 2, 0];
        let p = [0, 2, 2, 1, 1, 0, 0];
        assert_eq!(prediction_error(&t, &p).unwrap() + accuracy(&t, &p).unwrap(), 100.0);
        assert!(prediction_error(&[0], &[]).is_err());
    }

    #[test]
    fn per_class_breakdown() {
        let train = Embedding::new(Matrix::from_rows(&[[0.0], [10.0]]).unwrap(), vec![0, 1], 2).unwrap();
        let test = Embedding::new(Matrix::from_rows(&[[1.0], [9.0], [2.0]]).unwrap(), vec![0, 0, 1], 2).unwrap();
        let r = evaluate(&train, &test, 1).unwrap();
        assert!((r.error_percent - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.per_class[0].errors, 1);
        assert_eq!(r.per_class[1].error_percent(), 100.0);
    }

    #[test]
    fn sites_and_assignment() {
        let one = Embedding::new(Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap(), vec![0, 0], 1).unwrap();
        let s = voronoi_sites(&one).unwrap();
        assert_eq!(s.centroid(0), &[2.0, 3.0]);

        let mut rng = SeededRng::new(8);
        let pts = Matrix::new(30, 2, rng.uniform(-5.0, 5.0, 60)).unwrap();
        let labels = (0..30).map(|i| i % 3).collect();
        let e = Embedding::new(pts.clone(), labels, 3).unwrap();
        let sites = voronoi_sites(&e).unwrap();
        assert_eq!(voronoi_assign(&sites, &sites.centroids).unwrap(), vec![0, 1, 2]);
        let got = voronoi_assign(&sites, &pts).unwrap();
        for (i, p) in pts.row_iter().enumerate() {
            let d: Vec<f64> = (0..3)
                .map(|j| {
                    let c = sites.centroid(j);
                    (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)
                })
                .collect();
            let best = (0..3).min_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap()).unwrap();
            assert_eq!(got[i], best);
        }
    }
}
