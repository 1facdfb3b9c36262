//! Variance compaction by a square single-hidden-layer centroid-encoder.

use super::{pca_fit, variance_curve};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::network::{forward_partial, Activation, ModelParams, NetworkSpec};
use crate::numerics::Matrix;
use crate::training::{fit, FitReport, Mode, TrainConfig};

#[derive(Clone, Debug)]
pub struct CeTransformReport {
    pub raw_train: Vec<f64>,
    pub raw_test: Vec<f64>,
    pub transformed_train: Vec<f64>,
    pub transformed_test: Vec<f64>,
    pub spec: NetworkSpec,
    pub params: ModelParams,
    pub fit: FitReport,
}

/// Hidden-layer activations of an `n -> [n] -> n` network.
pub fn ce_transform(params: &ModelParams, spec: &NetworkSpec, x: &Matrix) -> Result<Matrix> {
    let hidden = forward_partial(params, spec, x, 1)?;
    if hidden.max_abs() == 0.0 {
        return Err(Error::Numeric(
            "transformed data is identically zero; the network carries no signal".into(),
        ));
    }
    Ok(hidden)
}

/// Trains an `n -> [n] -> n` tanh centroid-encoder on `train` for
/// `cfg.max_epochs` epochs and compares explained-variance curves (first
/// `up_to` entries) of the raw and transformed data.
pub fn ce_transform_experiment(
    train: &Dataset,
    test: &Dataset,
    cfg: &TrainConfig,
    up_to: usize,
) -> Result<CeTransformReport> {
    let n = train.n_features();
    if test.n_features() != n {
        return Err(Error::Data(format!(
            "train has {n} features, test has {}",
            test.n_features()
        )));
    }
    let up_to = up_to.min(n);
    let spec = NetworkSpec::square(n, Activation::Tanh)?;
    let cfg = TrainConfig {
        mode: Mode::CentroidEncoder,
        early_stopping: false,
        pretrain: false,
        ..cfg.clone()
    };
    let (params, report) = fit(train, &spec, &cfg)?;
    let curve = |x: &Matrix| variance_curve(&pca_fit(x)?, up_to);
    Ok(CeTransformReport {
        raw_train: curve(train.x())?,
        raw_test: curve(test.x())?,
        transformed_train: curve(&ce_transform(&params, &spec, train.x())?)?,
        transformed_test: curve(&ce_transform(&params, &spec, test.x())?)?,
        spec,
        params,
        fit: report,
    })
}
