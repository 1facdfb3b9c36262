//! Experiment configuration: a TOML document whose every field has a default
//! except the data paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{CsvOptions, LabelColumn};
use crate::error::{Error, Result};
use crate::network::{Activation, NetworkSpec};
use crate::training::{presets, Mode, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub data: DataConfig,
    pub network: NetworkConfig,
    pub train: TrainSection,
    pub eval: EvalConfig,
    pub variance: VarianceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            threads: 0,
            data: DataConfig::default(),
            network: NetworkConfig::default(),
            train: TrainSection::default(),
            eval: EvalConfig::default(),
            variance: VarianceConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Idx,
}

/// Label column as written in the config: a 0-based index, a header name,
/// or `"last"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumnSpec {
    Index(usize),
    Name(String),
}

impl LabelColumnSpec {
    fn to_label_column(&self) -> LabelColumn {
        match self {
            LabelColumnSpec::Index(i) => LabelColumn::Index(*i),
            LabelColumnSpec::Name(n) if n == "last" => LabelColumn::Last,
            LabelColumnSpec::Name(n) => LabelColumn::Name(n.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub format: DataFormat,
    /// CSV table.
    pub path: Option<PathBuf>,
    /// IDX image and label files.
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Optional held-out IDX test pair.
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub label_column: LabelColumnSpec,
    pub delimiter: String,
    pub has_header: bool,
    /// Keep only these class names (empty keeps all).
    pub classes: Vec<String>,
    /// Draw at most this many training rows per class (0 keeps all).
    pub per_class: usize,
    /// Z-score features on training statistics.
    pub standardize: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            format: DataFormat::Csv,
            path: None,
            images: None,
            labels: None,
            test_images: None,
            test_labels: None,
            label_column: LabelColumnSpec::Name("last".into()),
            delimiter: ",".into(),
            has_header: false,
            classes: Vec::new(),
            per_class: 0,
            standardize: true,
        }
    }
}

impl DataConfig {
    pub fn csv_options(&self) -> Result<CsvOptions> {
        let bytes = self.delimiter.as_bytes();
        if bytes.len() != 1 {
            return Err(Error::config("data.delimiter", "must be a single byte"));
        }
        Ok(CsvOptions {
            delimiter: bytes[0],
            has_header: self.has_header,
            label_column: self.label_column.to_label_column(),
        })
    }

    pub fn has_test_set(&self) -> bool {
        self.test_images.is_some() || self.test_labels.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Name of a preset configuration; fills every network and optimizer
    /// field the file leaves out.
    pub preset: Option<String>,
    pub hidden: Vec<usize>,
    pub bottleneck: usize,
    pub activation: String,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            preset: None,
            hidden: vec![100],
            bottleneck: 2,
            activation: "relu".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub mode: Mode,
    pub early_stopping: bool,
    pub validation_fraction: f64,
    pub pretrain: bool,
    pub pretrain_epochs: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            weight_decay: t.weight_decay,
            max_epochs: t.max_epochs,
            patience: t.patience,
            mode: t.mode,
            early_stopping: t.early_stopping,
            validation_fraction: t.validation_fraction,
            pretrain: t.pretrain,
            pretrain_epochs: t.pretrain_epochs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    pub repeats: usize,
    pub test_fraction: f64,
    /// Train a fresh model of the saved architecture for every repeat; when
    /// off, the saved weights are evaluated on every resplit.
    pub retrain: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k: 5,
            repeats: 10,
            test_fraction: 0.3,
            retrain: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceConfig {
    pub up_to: usize,
    pub ce_transform: bool,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            up_to: 20,
            ce_transform: false,
        }
    }
}

fn preset_overlay(preset: &presets::Preset) -> toml::Table {
    let mut network = toml::Table::new();
    network.insert(
        "hidden".into(),
        toml::Value::Array(preset.hidden.iter().map(|&h| toml::Value::Integer(h as i64)).collect()),
    );
    network.insert("activation".into(), toml::Value::String(preset.activation.name().into()));
    let mut train = toml::Table::new();
    train.insert("learning_rate".into(), toml::Value::Float(preset.learning_rate));
    train.insert("batch_size".into(), toml::Value::Integer(preset.batch_size as i64));
    train.insert("weight_decay".into(), toml::Value::Float(preset.weight_decay));
    let mut t = toml::Table::new();
    t.insert("network".into(), toml::Value::Table(network));
    t.insert("train".into(), toml::Value::Table(train));
    t
}

/// Recursively copies `top` over `base`.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_error(e: toml::de::Error) -> Error {
    let field = e.message().split('`').nth(1).unwrap_or("config").to_string();
    Error::config(field, e.to_string())
}

impl ExperimentConfig {
    /// Parses a config document, filling unset fields from the named preset
    /// and then from the defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: toml::Table = text.parse().map_err(parse_error)?;
        let preset_name = file
            .get("network")
            .and_then(|n| n.get("preset"))
            .and_then(|p| p.as_str())
            .map(str::to_string);
        let mut merged = toml::Table::new();
        if let Some(name) = preset_name {
            let preset = presets::lookup(&name)
                .ok_or_else(|| Error::config("network.preset", format!("unknown preset `{name}`")))?;
            merged = preset_overlay(&preset);
        }
        merge(&mut merged, file);
        let cfg: Self = toml::Value::Table(merged).try_into().map_err(parse_error)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Checks every field before any data is read.
    pub fn validate(&self) -> Result<()> {
        match self.data.format {
            DataFormat::Csv => {
                if self.data.path.is_none() {
                    return Err(Error::config("data.path", "a CSV path is required"));
                }
                self.data.csv_options()?;
            }
            DataFormat::Idx => {
                if self.data.images.is_none() || self.data.labels.is_none() {
                    return Err(Error::config("data.images", "IDX data needs `images` and `labels`"));
                }
                if self.data.test_images.is_some() != self.data.test_labels.is_some() {
                    return Err(Error::config(
                        "data.test_images",
                        "`test_images` and `test_labels` go together",
                    ));
                }
            }
        }
        self.activation()?;
        if self.network.bottleneck == 0 {
            return Err(Error::config("network.bottleneck", "must be at least 1"));
        }
        if self.network.hidden.contains(&0) {
            return Err(Error::config("network.hidden", "widths must be positive"));
        }
        self.train_config().validate()?;
        if self.eval.k == 0 {
            return Err(Error::config("eval.k", "must be at least 1"));
        }
        if self.eval.repeats == 0 {
            return Err(Error::config("eval.repeats", "must be at least 1"));
        }
        if !(self.eval.test_fraction > 0.0 && self.eval.test_fraction < 1.0) {
            return Err(Error::config("eval.test_fraction", "must lie in (0, 1)"));
        }
        if self.variance.up_to == 0 {
            return Err(Error::config("variance.up_to", "must be at least 1"));
        }
        Ok(())
    }

    pub fn activation(&self) -> Result<Activation> {
        self.network
            .activation
            .parse()
            .map_err(|_| Error::config("network.activation", format!("unknown activation `{}`", self.network.activation)))
    }

    pub fn network_spec(&self, input_dim: usize) -> Result<NetworkSpec> {
        NetworkSpec::bottleneck(input_dim, &self.network.hidden, self.network.bottleneck, self.activation()?)
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            weight_decay: t.weight_decay,
            max_epochs: t.max_epochs,
            patience: t.patience,
            seed: self.seed,
            mode: t.mode,
            early_stopping: t.early_stopping,
            validation_fraction: t.validation_fraction,
            knn_k: self.eval.k,
            pretrain: t.pretrain,
            pretrain_epochs: t.pretrain_epochs,
        }
    }
}
