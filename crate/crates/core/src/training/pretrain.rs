//! Layer-freeze pre-training.
//!
//! Stage `k` trains the network made of the first `k` encoder layers and the
//! last `k` decoder layers. The pair added at stage `k` starts from its
//! random initialization; every pair added earlier stays frozen. All stages
//! fit the same input/target pairs as the final network.

use super::{stream, targets_for, train_epoch_observed, AdamState, TrainConfig, STREAM_INIT, STREAM_PRETRAIN};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::network::{init_params, ModelParams, NetworkSpec};
use crate::numerics::SeededRng;

/// One pre-training stage, described in terms of the full network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    /// 1-based stage number.
    pub index: usize,
    /// Full-network layer indices making up this stage's network, in order.
    pub layers: Vec<usize>,
    /// The two layers trained in this stage (encoder, decoder).
    pub trainable: [usize; 2],
    pub spec: NetworkSpec,
}

impl Stage {
    fn sub_params(&self, full: &ModelParams) -> ModelParams {
        let mut p = ModelParams {
            layers: self.layers.iter().map(|&l| full.layers[l].clone()).collect(),
        };
        for (pos, &l) in self.layers.iter().enumerate() {
            p.layers[pos].frozen = !self.trainable.contains(&l);
        }
        p
    }

    fn write_back(&self, sub: &ModelParams, full: &mut ModelParams) {
        for (pos, &l) in self.layers.iter().enumerate() {
            full.layers[l] = sub.layers[pos].clone();
            full.layers[l].frozen = false;
        }
    }
}

/// Stages for a mirrored spec, innermost last. Empty when the bottleneck
/// follows the input directly.
pub fn stage_plan(spec: &NetworkSpec) -> Result<Vec<Stage>> {
    if !spec.is_mirrored() {
        return Err(Error::config(
            "network",
            "layer-freeze pre-training needs widths mirrored around the bottleneck",
        ));
    }
    let depth = spec.bottleneck_index();
    let n_layers = spec.n_layers();
    if depth < 2 {
        return Ok(Vec::new());
    }
    let widths = spec.widths();
    let acts = spec.activations();
    (1..=depth)
        .map(|k| {
            let layers: Vec<usize> = (0..k).chain(n_layers - k..n_layers).collect();
            let mut w = widths[..=k].to_vec();
            w.extend_from_slice(&widths[n_layers - k + 1..]);
            let a = layers.iter().map(|&l| acts[l]).collect();
            Ok(Stage {
                index: k,
                trainable: [k - 1, n_layers - k],
                spec: NetworkSpec::new(w, a, k)?,
                layers,
            })
        })
        .collect()
}

/// Runs every stage for `cfg.pretrain_epochs` epochs and returns the full,
/// unfrozen parameters ready for fine-tuning.
pub fn pretrain_layer_freeze(ds: &Dataset, spec: &NetworkSpec, cfg: &TrainConfig) -> Result<ModelParams> {
    pretrain_layer_freeze_observed(ds, spec, cfg, &mut |_, _| {})
}

/// [`pretrain_layer_freeze`] calling `observer` with the stage and its
/// parameters after every update.
pub fn pretrain_layer_freeze_observed(
    ds: &Dataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&Stage, &ModelParams),
) -> Result<ModelParams> {
    cfg.validate()?;
    if ds.n_features() != spec.input_dim() {
        return Err(Error::Data(format!(
            "data has {} features, network expects {}",
            ds.n_features(),
            spec.input_dim()
        )));
    }
    Ok(run(ds, spec, cfg, &mut stream(cfg, STREAM_PRETRAIN), observer)?.0)
}

pub(super) fn run(
    ds: &Dataset,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
    shuffle_rng: &mut SeededRng,
    observer: &mut dyn FnMut(&Stage, &ModelParams),
) -> Result<(ModelParams, Vec<f64>)> {
    let plan = stage_plan(spec)?;
    let mut full = init_params(spec, &mut stream(cfg, STREAM_INIT));
    let targets = targets_for(ds, cfg.mode)?;
    let mut losses = Vec::with_capacity(plan.len());
    for stage in &plan {
        let mut sub = stage.sub_params(&full);
        let mut state = AdamState::new(&sub);
        let mut loss = f64::NAN;
        for _ in 0..cfg.pretrain_epochs {
            loss = train_epoch_observed(
                &mut sub,
                &mut state,
                &stage.spec,
                ds.x(),
                &targets,
                cfg,
                shuffle_rng,
                &mut |p| observer(stage, p),
            )?;
        }
        log::debug!("pre-training stage {}: loss {loss:.6e}", stage.index);
        losses.push(loss);
        stage.write_back(&sub, &mut full);
    }
    Ok((full, losses))
}
