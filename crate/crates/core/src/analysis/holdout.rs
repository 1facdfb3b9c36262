//! Repeated stratified hold-out evaluation.

use rayon::prelude::*;

use super::{evaluate, Embedding, EvalReport};
use crate::dataset::{stratified_split, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::network::NetworkSpec;
use crate::numerics::{derive_seed, SeededRng};
use crate::training::{fit, TrainConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct HoldoutOptions {
    pub repeats: usize,
    pub test_fraction: f64,
    pub k: usize,
    /// Z-score features with statistics of each training side.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for HoldoutOptions {
    fn default() -> Self {
        Self {
            repeats: 10,
            test_fraction: 0.3,
            k: 5,
            standardize: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
    pub reports: Vec<EvalReport>,
}

impl EvalSummary {
    pub fn from_reports(reports: Vec<EvalReport>) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::contract("summary of zero repeats"));
        }
        let errors: Vec<f64> = reports.iter().map(|r| r.error_percent).collect();
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let std = (errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n).sqrt();
        Ok(Self {
            errors,
            mean,
            std,
            reports,
        })
    }
}

const STREAM_SPLIT: u64 = 0;
const STREAM_TRAIN: u64 = 1;

/// Seed of the `r`-th repeat's split.
pub fn split_seed(seed: u64, repeat: usize) -> u64 {
    derive_seed(derive_seed(seed, STREAM_SPLIT), repeat as u64)
}

/// Seed of the `r`-th repeat's training run.
pub fn train_seed(seed: u64, repeat: usize) -> u64 {
    derive_seed(derive_seed(seed, STREAM_TRAIN), repeat as u64)
}

/// Trains on `train` and scores `test` by k-NN against the training embedding.
pub fn train_and_score(
    train: &Dataset,
    test: &Dataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
    standardize_features: bool,
    k: usize,
) -> Result<EvalReport> {
    let (train, test) = if standardize_features {
        let all: Vec<usize> = (0..train.n_samples()).collect();
        let st = Standardizer::fit(train.x(), &all)?;
        (train.with_features(st.apply(train.x())?)?, test.with_features(st.apply(test.x())?)?)
    } else {
        (train.clone(), test.clone())
    };
    let (params, _) = fit(&train, spec, cfg)?;
    let reference = Embedding::of(&params, spec, &train)?;
    let queries = Embedding::of(&params, spec, &test)?;
    evaluate(&reference, &queries, k)
}

/// Splits `ds` afresh for every repeat, trains with a per-repeat seed and
/// reports the k-NN error of each test side. Repeats run in parallel; the
/// result does not depend on the thread count.
pub fn repeated_holdout(ds: &Dataset, spec: &NetworkSpec, cfg: &TrainConfig, opts: &HoldoutOptions) -> Result<EvalSummary> {
    let reports = (0..opts.repeats)
        .into_par_iter()
        .map(|r| {
            let split = stratified_split(ds, opts.test_fraction, &mut SeededRng::new(split_seed(opts.seed, r)))?;
            let cfg = TrainConfig {
                seed: train_seed(opts.seed, r),
                ..cfg.clone()
            };
            let report = train_and_score(
                &ds.subset(&split.train),
                &ds.subset(&split.test),
                spec,
                &cfg,
                opts.standardize,
                opts.k,
            )?;
            log::debug!("repeat {}: {:.3}%", r + 1, report.error_percent);
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    EvalSummary::from_reports(reports)
}
