//! Command-line front end: `train`, `eval`, `embed` and `variance`.
//!
//! Every command reads an [`ExperimentConfig`], applies flag overrides,
//! writes the resolved config next to its outputs and produces the same
//! bytes when re-run with the same config.

mod config;

pub use config::{
    DataConfig, DataFormat, EvalConfig, ExperimentConfig, LabelColumnSpec, NetworkConfig, TrainSection,
    VarianceConfig,
};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{
    ce_transform_experiment, embedding_csv, embedding_svg, evaluate, pca_fit, repeated_holdout, split_seed,
    train_and_score, train_seed, variance_csv, variance_curve, variance_svg, voronoi_sites, Embedding, EvalReport,
    EvalSummary, HoldoutOptions,
};
use crate::dataset::{load_csv, load_idx, stratified_split, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::network::{load_model, save_model, SavedModel};
use crate::numerics::{derive_seed, SeededRng};
use crate::training::{fit, FitReport, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "centroid-encoder", version, about = "Train and evaluate centroid-encoders")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// CSV data file, overriding `data.path`.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write `model.bin` and `train_log.tsv`.
    Train,
    /// k-NN prediction error over repeated stratified splits.
    Eval {
        /// Saved model; its architecture is used for every repeat.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Write the bottleneck embedding as CSV, plus an SVG plot for 2-D models.
    Embed {
        #[arg(long)]
        model: PathBuf,
    },
    /// Cumulative explained-variance curves.
    Variance {
        /// Also train a square centroid-encoder and analyse its hidden layer.
        #[arg(long)]
        ce_transform: bool,
        #[arg(long)]
        up_to: Option<usize>,
        /// Comma-separated class names to keep.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<String>>,
    },
}

/// Process exit status for an error: 1 configuration, 2 data, 3 numeric.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 1,
        Error::Numeric(_) => 3,
        Error::Contract(_)
        | Error::BadMagic { .. }
        | Error::Truncated { .. }
        | Error::CountMismatch { .. }
        | Error::Csv { .. }
        | Error::Data(_)
        | Error::Io { .. } => 2,
    }
}

/// Loads the config file (or defaults) and applies flag overrides.
pub fn resolve_config(global: &GlobalArgs, command: &Command) -> Result<ExperimentConfig> {
    let mut cfg = match &global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &global.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(t) = global.threads {
        cfg.threads = t;
    }
    if let Some(p) = &global.data {
        cfg.data.format = DataFormat::Csv;
        cfg.data.path = Some(p.clone());
    }
    match command {
        Command::Eval { k, repeats, .. } => {
            if let Some(k) = k {
                cfg.eval.k = *k;
            }
            if let Some(r) = repeats {
                cfg.eval.repeats = *r;
            }
        }
        Command::Variance {
            ce_transform,
            up_to,
            classes,
        } => {
            if *ce_transform {
                cfg.variance.ce_transform = true;
            }
            if let Some(u) = up_to {
                cfg.variance.up_to = *u;
            }
            if let Some(c) = classes {
                cfg.data.classes = c.clone();
            }
        }
        Command::Train | Command::Embed { .. } => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::config("arguments", e.to_string()))?;
    run(&cli)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(&cli.global, &cli.command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Train => cmd_train(&cfg).map(|_| ()),
        Command::Eval { model, .. } => cmd_eval(&cfg, model).map(|_| ()),
        Command::Embed { model } => cmd_embed(&cfg, model),
        Command::Variance { .. } => cmd_variance(&cfg),
    })
}

/// Training rows, and the held-out test rows when the config names them.
#[derive(Clone, Debug)]
pub struct ExperimentData {
    pub train: Dataset,
    pub test: Option<Dataset>,
}

const STREAM_SUBSAMPLE: u64 = 0x5ab;

/// Reads the configured data and applies the class filter and per-class cap.
/// No normalization is applied here.
pub fn load_data(cfg: &ExperimentConfig) -> Result<ExperimentData> {
    let d = &cfg.data;
    let (mut train, mut test) = match d.format {
        DataFormat::Csv => (load_csv(d.path.as_ref().expect("validated"), &d.csv_options()?)?, None),
        DataFormat::Idx => {
            let train = load_idx(d.images.as_ref().expect("validated"), d.labels.as_ref().expect("validated"))?;
            let test = match (&d.test_images, &d.test_labels) {
                (Some(i), Some(l)) => Some(load_idx(i, l)?),
                _ => None,
            };
            (train, test)
        }
    };
    if !d.classes.is_empty() {
        train = train.filter_classes(&d.classes)?;
        test = test.map(|t| t.filter_classes(&d.classes)).transpose()?;
    }
    if let Some(t) = &test {
        if t.class_names() != train.class_names() {
            return Err(Error::Data("train and test sets have different classes".into()));
        }
        if t.n_features() != train.n_features() {
            return Err(Error::Data("train and test sets have different feature counts".into()));
        }
    }
    if d.per_class > 0 {
        train = train.sample_per_class(d.per_class, &mut SeededRng::new(derive_seed(cfg.seed, STREAM_SUBSAMPLE)));
    }
    if train.n_samples() == 0 {
        return Err(Error::Data("no samples to work with".into()));
    }
    Ok(ExperimentData { train, test })
}

fn prepare_out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    write_file(&dir.join("config.toml"), cfg.to_toml()?.as_bytes())?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn fit_standardizer(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Option<Standardizer>> {
    if !cfg.data.standardize {
        return Ok(None);
    }
    let all: Vec<usize> = (0..ds.n_samples()).collect();
    Standardizer::fit(ds.x(), &all).map(Some)
}

fn apply_standardizer(st: Option<&Standardizer>, ds: &Dataset) -> Result<Dataset> {
    match st {
        Some(st) => ds.with_features(st.apply(ds.x())?),
        None => Ok(ds.clone()),
    }
}

/// Fits a model on the training data; writes `model.bin` and `train_log.tsv`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<(SavedModel, FitReport)> {
    let data = load_data(cfg)?;
    let out = prepare_out_dir(cfg)?;
    let standardizer = fit_standardizer(cfg, &data.train)?;
    let train = apply_standardizer(standardizer.as_ref(), &data.train)?;
    let spec = cfg.network_spec(train.n_features())?;
    let (params, report) = fit(&train, &spec, &cfg.train_config())?;
    log::info!(
        "trained {} epochs (best {}), final loss {:.6e}, {:.1}s",
        report.epochs_run,
        report.best_epoch,
        report.final_loss().unwrap_or(f64::NAN),
        report.wall_seconds
    );
    let model = SavedModel {
        spec,
        params,
        standardizer,
    };
    save_model(out.join("model.bin"), &model)?;
    write_file(&out.join("train_log.tsv"), report.to_tsv().as_bytes())?;
    Ok((model, report))
}

/// Scores a saved model without retraining: the model's own normalization,
/// reference points from the training side of each split.
fn eval_fixed(cfg: &ExperimentConfig, model: &SavedModel, data: &ExperimentData, r: usize) -> Result<EvalReport> {
    let (train, test) = match &data.test {
        Some(test) => (data.train.clone(), test.clone()),
        None => {
            let mut rng = SeededRng::new(split_seed(cfg.seed, r));
            let split = stratified_split(&data.train, cfg.eval.test_fraction, &mut rng)?;
            (data.train.subset(&split.train), data.train.subset(&split.test))
        }
    };
    let train = apply_standardizer(model.standardizer.as_ref(), &train)?;
    let test = apply_standardizer(model.standardizer.as_ref(), &test)?;
    let reference = Embedding::of(&model.params, &model.spec, &train)?;
    let queries = Embedding::of(&model.params, &model.spec, &test)?;
    evaluate(&reference, &queries, cfg.eval.k)
}

/// Repeated k-NN evaluation; writes `eval.csv` and `eval_per_class.csv`.
pub fn cmd_eval(cfg: &ExperimentConfig, model_path: &Path) -> Result<EvalSummary> {
    let model = load_model(model_path)?;
    let data = load_data(cfg)?;
    if data.train.n_features() != model.spec.input_dim() {
        return Err(Error::Data(format!(
            "model expects {} features, data has {}",
            model.spec.input_dim(),
            data.train.n_features()
        )));
    }
    let expected_train = match &data.test {
        Some(_) => data.train.n_samples(),
        None => data
            .train
            .class_counts()
            .iter()
            .filter(|&&n| n >= 2)
            .map(|&n| n - ((n as f64 * cfg.eval.test_fraction).round() as usize).clamp(1, n - 1))
            .sum(),
    };
    if cfg.eval.k > expected_train {
        return Err(Error::config(
            "eval.k",
            format!("k = {} exceeds the {expected_train} training rows", cfg.eval.k),
        ));
    }
    let out = prepare_out_dir(cfg)?;
    let tc = cfg.train_config();
    let summary = match (&data.test, cfg.eval.retrain) {
        (None, true) => {
            let opts = HoldoutOptions {
                repeats: cfg.eval.repeats,
                test_fraction: cfg.eval.test_fraction,
                k: cfg.eval.k,
                standardize: cfg.data.standardize,
                seed: cfg.seed,
            };
            repeated_holdout(&data.train, &model.spec, &tc, &opts)?
        }
        (Some(test), true) => {
            let reports = (0..cfg.eval.repeats)
                .into_par_iter()
                .map(|r| {
                    let tc = TrainConfig {
                        seed: train_seed(cfg.seed, r),
                        ..tc.clone()
                    };
                    train_and_score(&data.train, test, &model.spec, &tc, cfg.data.standardize, cfg.eval.k)
                })
                .collect::<Result<Vec<_>>>()?;
            EvalSummary::from_reports(reports)?
        }
        (_, false) => EvalSummary::from_reports(
            (0..cfg.eval.repeats)
                .into_par_iter()
                .map(|r| eval_fixed(cfg, &model, &data, r))
                .collect::<Result<Vec<_>>>()?,
        )?,
    };

    let mut table = String::from("repeat,error_percent\n");
    for (r, e) in summary.errors.iter().enumerate() {
        let _ = writeln!(table, "{},{e}", r + 1);
    }
    let _ = writeln!(table, "mean,{}", summary.mean);
    let _ = writeln!(table, "std,{}", summary.std);
    write_file(&out.join("eval.csv"), table.as_bytes())?;

    let mut per_class = String::from("class,samples,errors,error_percent\n");
    let names = data.train.class_names();
    for (j, name) in names.iter().enumerate() {
        let samples: usize = summary.reports.iter().map(|r| r.per_class[j].samples).sum();
        let errors: usize = summary.reports.iter().map(|r| r.per_class[j].errors).sum();
        let pct = if samples == 0 { 0.0 } else { 100.0 * errors as f64 / samples as f64 };
        let _ = writeln!(per_class, "{name},{samples},{errors},{pct}");
    }
    write_file(&out.join("eval_per_class.csv"), per_class.as_bytes())?;
    println!(
        "k-NN (k={}) error over {} repeat(s): {:.2} ± {:.2} %",
        cfg.eval.k, cfg.eval.repeats, summary.mean, summary.std
    );
    Ok(summary)
}

/// Writes `embedding.csv` (and `embedding_test.csv` for a held-out set), plus
/// `embedding.svg` with Voronoi sites of the training embedding when the
/// bottleneck is 2-D.
pub fn cmd_embed(cfg: &ExperimentConfig, model_path: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let data = load_data(cfg)?;
    if data.train.n_features() != model.spec.input_dim() {
        return Err(Error::Data(format!(
            "model expects {} features, data has {}",
            model.spec.input_dim(),
            data.train.n_features()
        )));
    }
    let out = prepare_out_dir(cfg)?;
    let names = data.train.class_names().to_vec();
    let train = apply_standardizer(model.standardizer.as_ref(), &data.train)?;
    let train_emb = Embedding::of(&model.params, &model.spec, &train)?;
    write_file(&out.join("embedding.csv"), embedding_csv(&train_emb, &names)?.as_bytes())?;
    let test_emb = match &data.test {
        Some(t) => {
            let t = apply_standardizer(model.standardizer.as_ref(), t)?;
            let e = Embedding::of(&model.params, &model.spec, &t)?;
            write_file(&out.join("embedding_test.csv"), embedding_csv(&e, &names)?.as_bytes())?;
            Some(e)
        }
        None => None,
    };
    if train_emb.dim() == 2 {
        // Sites need every class present in the training embedding.
        let sites = voronoi_sites(&train_emb).ok();
        if sites.is_none() {
            log::warn!("some class has no training points; plotting without Voronoi sites");
        }
        let shown = test_emb.as_ref().unwrap_or(&train_emb);
        let svg = embedding_svg(shown, &names, sites.as_ref())?;
        write_file(&out.join("embedding.svg"), svg.as_bytes())?;
    } else {
        log::warn!("bottleneck is {}-D; writing CSV only", train_emb.dim());
    }
    Ok(())
}

const STREAM_VARIANCE_SPLIT: u64 = 0x7a;

/// Writes `variance_raw.csv`, and with the CE transform `variance_ce.csv`
/// and `variance_ce_test.csv`, plus `variance.svg`.
pub fn cmd_variance(cfg: &ExperimentConfig) -> Result<()> {
    let data = load_data(cfg)?;
    let out = prepare_out_dir(cfg)?;
    let n = data.train.n_features();
    let mut up_to = cfg.variance.up_to;
    if up_to > n {
        log::warn!("variance.up_to = {up_to} exceeds the {n} features; clamped");
        up_to = n;
    }
    let raw = variance_curve(&pca_fit(data.train.x())?, up_to)?;
    write_file(&out.join("variance_raw.csv"), variance_csv(&raw).as_bytes())?;
    let mut curves: Vec<(&str, Vec<f64>)> = vec![("raw", raw)];
    if cfg.variance.ce_transform {
        let (train, test) = match &data.test {
            Some(t) => (data.train.clone(), t.clone()),
            None => {
                let mut rng = SeededRng::new(derive_seed(cfg.seed, STREAM_VARIANCE_SPLIT));
                let split = stratified_split(&data.train, cfg.eval.test_fraction, &mut rng)?;
                (data.train.subset(&split.train), data.train.subset(&split.test))
            }
        };
        let report = ce_transform_experiment(&train, &test, &cfg.train_config(), up_to)?;
        write_file(&out.join("variance_ce.csv"), variance_csv(&report.transformed_train).as_bytes())?;
        write_file(&out.join("variance_ce_test.csv"), variance_csv(&report.transformed_test).as_bytes())?;
        write_file(&out.join("train_log.tsv"), report.fit.to_tsv().as_bytes())?;
        curves.push(("ce-transformed", report.transformed_train));
    }
    let refs: Vec<(&str, &[f64])> = curves.iter().map(|(name, c)| (*name, c.as_slice())).collect();
    write_file(&out.join("variance.svg"), variance_svg(&refs)?.as_bytes())?;
    for (name, c) in &curves {
        if let Some(v) = c.get(1) {
            println!("{name}: {:.4} of the variance in 2 dimensions", v);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::config("x", "y")), 1);
        assert_eq!(exit_code(&Error::Data("d".into())), 2);
        assert_eq!(
            exit_code(&Error::CountMismatch {
                images: 1,
                labels: 2
            }),
            2
        );
        assert_eq!(exit_code(&Error::Numeric("n".into())), 3);
    }

    #[test]
    fn flags_override_file_values() {
        let cli = Cli::try_parse_from([
            "centroid-encoder",
            "eval",
            "--model",
            "m.bin",
            "--seed",
            "9",
            "--k",
            "3",
            "--data",
            "x.csv",
        ])
        .unwrap();
        let cfg = resolve_config(&cli.global, &cli.command).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.eval.k, 3);
        assert_eq!(cfg.data.path.as_deref(), Some(Path::new("x.csv")));
    }
}
