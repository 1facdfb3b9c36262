//! Losses, Adam, mini-batch epochs, early stopping and layer-freeze pre-training.

mod adam;
mod loss;
mod pretrain;
pub mod presets;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use loss::{ce_loss, dataset_loss, output_delta};
pub use pretrain::{pretrain_layer_freeze, pretrain_layer_freeze_observed, stage_plan, Stage};

use std::fmt::Write as _;
use std::time::Instant;

use crate::analysis::{knn_predict, prediction_error};
use crate::dataset::{build_targets, compute_centroids, stratified_partition, Dataset};
use crate::error::{Error, Result};
use crate::network::{backward, encode, forward, init_params, ModelParams, NetworkSpec};
use crate::numerics::{derive_seed, Matrix, SeededRng};

/// What the network is trained to reproduce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Map each sample to the centroid of its class.
    CentroidEncoder,
    /// Map each sample to itself.
    Autoencoder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// L2 coefficient added to weight gradients.
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Non-improving validation epochs tolerated before stopping.
    pub patience: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Hold out a validation set, stop early on its k-NN error, then retrain
    /// on all rows. When off, train on every row for `max_epochs`.
    pub early_stopping: bool,
    pub validation_fraction: f64,
    /// Neighbours used for the validation error.
    pub knn_k: usize,
    /// Run layer-freeze pre-training before fine-tuning.
    pub pretrain: bool,
    pub pretrain_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 64,
            weight_decay: 2e-5,
            max_epochs: 200,
            patience: 10,
            seed: 0,
            mode: Mode::CentroidEncoder,
            early_stopping: true,
            validation_fraction: 0.1,
            knn_k: 5,
            pretrain: false,
            pretrain_epochs: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be positive and finite"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("weight_decay", "must be non-negative"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max_epochs", "must be at least 1"));
        }
        if self.early_stopping && !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::config("validation_fraction", "must lie in (0, 1)"));
        }
        if self.knn_k == 0 {
            return Err(Error::config("knn_k", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of Adam updates in one epoch over `n` rows.
    pub fn updates_per_epoch(&self, n: usize) -> usize {
        n.div_ceil(self.batch_size)
    }
}

/// Training targets for `ds` under `mode`.
pub fn targets_for(ds: &Dataset, mode: Mode) -> Result<Matrix> {
    match mode {
        Mode::CentroidEncoder => build_targets(ds, &compute_centroids(ds)?),
        Mode::Autoencoder => Ok(ds.x().clone()),
    }
}

/// One pass over shuffled mini-batches; returns the loss over all rows afterwards.
pub fn train_epoch(
    params: &mut ModelParams,
    state: &mut AdamState,
    spec: &NetworkSpec,
    inputs: &Matrix,
    targets: &Matrix,
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Result<f64> {
    train_epoch_observed(params, state, spec, inputs, targets, cfg, rng, &mut |_| {})
}

/// [`train_epoch`] calling `after_update` with the parameters after every Adam step.
#[allow(clippy::too_many_arguments)]
pub fn train_epoch_observed(
    params: &mut ModelParams,
    state: &mut AdamState,
    spec: &NetworkSpec,
    inputs: &Matrix,
    targets: &Matrix,
    cfg: &TrainConfig,
    rng: &mut SeededRng,
    after_update: &mut dyn FnMut(&ModelParams),
) -> Result<f64> {
    if inputs.rows() != targets.rows() || inputs.rows() == 0 {
        return Err(Error::contract(format!(
            "{} input rows against {} target rows",
            inputs.rows(),
            targets.rows()
        )));
    }
    let order = rng.permutation(inputs.rows());
    for batch in order.chunks(cfg.batch_size) {
        let xb = inputs.select_rows(batch);
        let tb = targets.select_rows(batch);
        let trace = forward(params, spec, &xb)?;
        let delta = output_delta(trace.output(), &tb)?;
        let grads = backward(params, spec, &trace, &delta)?;
        adam_step(params, &grads, state, cfg.learning_rate, cfg.weight_decay)?;
        after_update(params);
    }
    if !params.is_finite() {
        return Err(Error::Numeric("parameters became non-finite during training".into()));
    }
    dataset_loss(params, spec, inputs, targets)
}

/// Per-epoch history of a [`fit`] run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitReport {
    /// Training loss after each early-stopping epoch (or each epoch when
    /// early stopping is off).
    pub train_loss: Vec<f64>,
    /// Validation k-NN error (percent) after each early-stopping epoch.
    pub validation_error: Vec<f64>,
    /// Validation loss after each early-stopping epoch; breaks ties in the
    /// validation error.
    pub validation_loss: Vec<f64>,
    /// 1-based epoch with the lowest validation error (then loss).
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Loss on all rows after each epoch of the final retraining.
    pub retrain_loss: Vec<f64>,
    /// Final loss of every pre-training stage.
    pub pretrain_loss: Vec<f64>,
    pub wall_seconds: f64,
}

impl FitReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.retrain_loss.last().or(self.train_loss.last()).copied()
    }

    /// Tab-separated log with one row per epoch. Elapsed time is left out so
    /// the log is reproducible.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("phase\tepoch\tloss\tvalidation_error\tvalidation_loss\n");
        for (s, loss) in self.pretrain_loss.iter().enumerate() {
            let _ = writeln!(out, "pretrain_stage\t{}\t{loss:.12e}\t\t", s + 1);
        }
        for (e, loss) in self.train_loss.iter().enumerate() {
            let v = self
                .validation_error
                .get(e)
                .map_or_else(String::new, |v| format!("{v:.6}"));
            let vl = self
                .validation_loss
                .get(e)
                .map_or_else(String::new, |v| format!("{v:.12e}"));
            let _ = writeln!(out, "train\t{}\t{loss:.12e}\t{v}\t{vl}", e + 1);
        }
        for (e, loss) in self.retrain_loss.iter().enumerate() {
            let _ = writeln!(out, "retrain\t{}\t{loss:.12e}\t\t", e + 1);
        }
        out
    }
}

// Independent random streams carved out of one seed.
const STREAM_VALIDATION: u64 = 0;
const STREAM_INIT: u64 = 1;
const STREAM_PRETRAIN: u64 = 2;
const STREAM_EPOCHS: u64 = 3;
const STREAM_RETRAIN: u64 = 4;

fn stream(cfg: &TrainConfig, which: u64) -> SeededRng {
    SeededRng::new(derive_seed(cfg.seed, which))
}

/// Trains from a Glorot initialization (plus pre-training when
/// `cfg.pretrain` is set).
pub fn fit(ds: &Dataset, spec: &NetworkSpec, cfg: &TrainConfig) -> Result<(ModelParams, FitReport)> {
    fit_impl(ds, spec, cfg, None)
}

/// Trains starting from `initial`; `cfg.pretrain` is ignored.
pub fn fit_from(
    ds: &Dataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
    initial: ModelParams,
) -> Result<(ModelParams, FitReport)> {
    fit_impl(ds, spec, cfg, Some(initial))
}

fn fit_impl(
    ds: &Dataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
    initial: Option<ModelParams>,
) -> Result<(ModelParams, FitReport)> {
    cfg.validate()?;
    if ds.n_features() != spec.input_dim() {
        return Err(Error::Data(format!(
            "data has {} features, network expects {}",
            ds.n_features(),
            spec.input_dim()
        )));
    }
    if ds.n_samples() == 0 {
        return Err(Error::Data("cannot train on an empty dataset".into()));
    }
    let started = Instant::now();
    let mut report = FitReport::default();

    let (train_rows, val_rows) = if cfg.early_stopping {
        let all: Vec<usize> = (0..ds.n_samples()).collect();
        stratified_partition(ds, &all, cfg.validation_fraction, &mut stream(cfg, STREAM_VALIDATION))?
    } else {
        ((0..ds.n_samples()).collect(), Vec::new())
    };
    let train = ds.subset(&train_rows);

    let start = match initial {
        Some(p) => {
            p.check_shapes(spec)?;
            p
        }
        None if cfg.pretrain => {
            let (p, losses) = pretrain::run(&train, spec, cfg, &mut stream(cfg, STREAM_PRETRAIN), &mut |_, _| {})?;
            report.pretrain_loss = losses;
            p
        }
        None => init_params(spec, &mut stream(cfg, STREAM_INIT)),
    };
    let mut start = start;
    start.unfreeze_all();

    if !cfg.early_stopping {
        let targets = targets_for(&train, cfg.mode)?;
        let mut params = start;
        let mut state = AdamState::new(&params);
        let mut rng = stream(cfg, STREAM_EPOCHS);
        for _ in 0..cfg.max_epochs {
            let loss = train_epoch(&mut params, &mut state, spec, train.x(), &targets, cfg, &mut rng)?;
            report.train_loss.push(loss);
        }
        report.epochs_run = cfg.max_epochs;
        report.best_epoch = cfg.max_epochs;
        report.wall_seconds = started.elapsed().as_secs_f64();
        return Ok((params, report));
    }

    let val = ds.subset(&val_rows);
    let targets = targets_for(&train, cfg.mode)?;
    // Validation targets use the training centroids.
    let val_targets = match cfg.mode {
        Mode::CentroidEncoder => build_targets(&val, &compute_centroids(&train)?)?,
        Mode::Autoencoder => val.x().clone(),
    };
    if cfg.knn_k > train.n_samples() {
        return Err(Error::config(
            "knn_k",
            format!("k = {} exceeds the {} training rows", cfg.knn_k, train.n_samples()),
        ));
    }
    let mut params = start.clone();
    let mut state = AdamState::new(&params);
    let mut rng = stream(cfg, STREAM_EPOCHS);
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut since_best = 0usize;
    for epoch in 1..=cfg.max_epochs {
        let loss = train_epoch(&mut params, &mut state, spec, train.x(), &targets, cfg, &mut rng)?;
        let reference = encode(&params, spec, train.x())?;
        let queries = encode(&params, spec, val.x())?;
        let predicted = knn_predict(&reference, train.labels(), &queries, cfg.knn_k)?;
        let err = prediction_error(val.labels(), &predicted)?;
        let val_loss = dataset_loss(&params, spec, val.x(), &val_targets)?;
        report.train_loss.push(loss);
        report.validation_error.push(err);
        report.validation_loss.push(val_loss);
        log::debug!("epoch {epoch}: loss {loss:.6e}, validation error {err:.3}%, validation loss {val_loss:.6e}");
        // Equal k-NN errors are common on small validation sets; the
        // validation loss decides between them.
        if err < best.0 || (err == best.0 && val_loss < best.1) {
            best = (err, val_loss);
            report.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > cfg.patience {
                break;
            }
        }
    }
    report.epochs_run = report.train_loss.len();

    // Retrain from the same starting point on training and validation rows
    // together, for as many epochs as the best validation run needed.
    let targets = targets_for(ds, cfg.mode)?;
    let mut params = start;
    let mut state = AdamState::new(&params);
    let mut rng = stream(cfg, STREAM_RETRAIN);
    for _ in 0..report.best_epoch.min(cfg.max_epochs) {
        let loss = train_epoch(&mut params, &mut state, spec, ds.x(), &targets, cfg, &mut rng)?;
        report.retrain_loss.push(loss);
    }
    report.wall_seconds = started.elapsed().as_secs_f64();
    Ok((params, report))
}
