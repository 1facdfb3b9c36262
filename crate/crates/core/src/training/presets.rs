//! Reference topologies and hyper-parameters for the benchmark datasets.

use super::TrainConfig;
use crate::error::Result;
use crate::network::{Activation, NetworkSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    /// Encoder hidden widths; the bottleneck is 2 wide.
    pub hidden: &'static [usize],
    pub activation: Activation,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl Preset {
    pub fn spec(&self, input_dim: usize) -> Result<NetworkSpec> {
        NetworkSpec::bottleneck(input_dim, self.hidden, 2, self.activation)
    }

    /// `base` with this preset's optimizer settings.
    pub fn train_config(&self, base: TrainConfig) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            weight_decay: self.weight_decay,
            ..base
        }
    }
}

pub const MNIST: Preset = Preset {
    name: "mnist",
    hidden: &[1000, 500, 125],
    activation: Activation::Tanh,
    learning_rate: 0.0008,
    batch_size: 512,
    weight_decay: 2e-5,
};

pub const USPS: Preset = Preset {
    name: "usps",
    hidden: &[2000, 1000, 500],
    activation: Activation::Relu,
    learning_rate: 0.001,
    batch_size: 64,
    weight_decay: 2e-5,
};

pub const PHONEME: Preset = Preset {
    name: "phoneme",
    hidden: &[250, 150],
    activation: Activation::Relu,
    learning_rate: 0.01,
    batch_size: 50,
    weight_decay: 2e-5,
};

pub const LETTER: Preset = Preset {
    name: "letter",
    hidden: &[250, 150],
    activation: Activation::Relu,
    learning_rate: 0.01,
    batch_size: 50,
    weight_decay: 5e-5,
};

pub const LANDSAT: Preset = Preset {
    name: "landsat",
    hidden: &[250, 150],
    activation: Activation::Relu,
    learning_rate: 0.01,
    batch_size: 50,
    weight_decay: 5e-5,
};

pub const IRIS: Preset = Preset {
    name: "iris",
    hidden: &[100],
    activation: Activation::Relu,
    learning_rate: 0.001,
    batch_size: 16,
    weight_decay: 2e-5,
};

pub const SONAR: Preset = Preset {
    name: "sonar",
    hidden: &[500, 250],
    activation: Activation::Relu,
    learning_rate: 0.001,
    batch_size: 16,
    weight_decay: 2e-5,
};

pub const ALL: [Preset; 7] = [MNIST, USPS, PHONEME, LETTER, LANDSAT, IRIS, SONAR];

pub fn lookup(name: &str) -> Option<Preset> {
    ALL.iter().copied().find(|p| p.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_has_a_two_wide_bottleneck() {
        for p in ALL {
            let spec = p.spec(10).unwrap();
            assert_eq!(spec.bottleneck_dim(), 2, "{}", p.name);
        }
    }

    #[test]
    fn iris_spec() {
        let spec = lookup("Iris").unwrap().spec(4).unwrap();
        assert_eq!(spec.widths(), &[4, 100, 2, 100, 4]);
        assert!(lookup("cifar").is_none());
    }
}
