//! Feed-forward perceptron with a narrow bottleneck layer.
//!
//! Weights are stored `fan_in x fan_out`, so a layer computes
//! `z = a W + b` on a batch `a` held one sample per row.

mod persist;

pub use persist::{decode_model, encode_model, load_model, save_model, SavedModel};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative from the pre-activation `z` and the output `a = f(z)`.
    /// The relu derivative at exactly zero is taken as zero.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
            Activation::Relu => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Relu),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "linear",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "linear" | "identity" => Ok(Activation::Identity),
            other => Err(Error::config("activation", format!("unknown activation `{other}`"))),
        }
    }
}

/// Layer widths and per-layer activations.
///
/// `widths[0]` is the input dimension and `widths[L]` the output dimension;
/// layer `l` maps `widths[l]` to `widths[l + 1]` and applies
/// `activations[l]`. The embedding is the output of layer `bottleneck - 1`,
/// i.e. the activations of width `widths[bottleneck]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    widths: Vec<usize>,
    activations: Vec<Activation>,
    bottleneck: usize,
}

impl NetworkSpec {
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>, bottleneck: usize) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::config("widths", "need at least an input and an output width"));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::config("widths", "every width must be positive"));
        }
        if widths[0] != widths[widths.len() - 1] {
            return Err(Error::config(
                "widths",
                format!("output width {} differs from input width {}", widths[widths.len() - 1], widths[0]),
            ));
        }
        if activations.len() != widths.len() - 1 {
            return Err(Error::config(
                "activations",
                format!("{} activations for {} layers", activations.len(), widths.len() - 1),
            ));
        }
        if bottleneck == 0 || bottleneck >= widths.len() {
            return Err(Error::config("bottleneck", format!("index {bottleneck} is not a layer output")));
        }
        Ok(Self {
            widths,
            activations,
            bottleneck,
        })
    }

    /// Mirrored encoder/decoder: `n -> hidden... -> m -> reversed hidden... -> n`.
    ///
    /// Hidden layers use `activation`; the bottleneck and output layers are linear.
    pub fn bottleneck(input: usize, hidden: &[usize], m: usize, activation: Activation) -> Result<Self> {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(m);
        widths.extend(hidden.iter().rev());
        widths.push(input);
        let k = hidden.len();
        let mut acts = vec![activation; k];
        acts.push(Activation::Identity);
        acts.extend(std::iter::repeat_n(activation, k));
        acts.push(Activation::Identity);
        Self::new(widths, acts, k + 1)
    }

    /// `n -> [n] -> n` with a single hidden layer of the given activation.
    pub fn square(input: usize, activation: Activation) -> Result<Self> {
        Self::new(vec![input; 3], vec![activation, Activation::Identity], 1)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn n_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn bottleneck_index(&self) -> usize {
        self.bottleneck
    }

    pub fn bottleneck_dim(&self) -> usize {
        self.widths[self.bottleneck]
    }

    /// Widths read the same forwards and backwards around the bottleneck.
    pub fn is_mirrored(&self) -> bool {
        let l = self.n_layers();
        2 * self.bottleneck == l && (0..=l).all(|i| self.widths[i] == self.widths[l - i])
    }

    pub fn parameter_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// One dense layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// `fan_in x fan_out`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub frozen: bool,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: Matrix::zeros(fan_in, fan_out),
            bias: vec![0.0; fan_out],
            frozen: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<Layer>,
}

impl ModelParams {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self {
            layers: spec.widths.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    /// Checks that every layer matches the widths of `spec`.
    pub fn check_shapes(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.n_layers() {
            return Err(Error::contract(format!(
                "{} parameter layers for a {}-layer spec",
                self.layers.len(),
                spec.n_layers()
            )));
        }
        for (l, (layer, w)) in self.layers.iter().zip(spec.widths.windows(2)).enumerate() {
            if layer.weights.shape() != (w[0], w[1]) || layer.bias.len() != w[1] {
                return Err(Error::contract(format!(
                    "layer {l} has shape {:?}/{}, spec wants {}x{}",
                    layer.weights.shape(),
                    layer.bias.len(),
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn set_frozen(&mut self, layer: usize, frozen: bool) {
        self.layers[layer].frozen = frozen;
    }

    pub fn unfreeze_all(&mut self) {
        for layer in &mut self.layers {
            layer.frozen = false;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

/// Glorot-uniform weights, zero biases.
///
/// Layer `l` draws its weights, row by row, from
/// `U(-sqrt(6 / (fan_in + fan_out)), +sqrt(6 / (fan_in + fan_out)))`.
pub fn init_params(spec: &NetworkSpec, rng: &mut SeededRng) -> ModelParams {
    let layers = spec
        .widths
        .windows(2)
        .map(|w| init_layer(w[0], w[1], rng))
        .collect();
    ModelParams { layers }
}

pub(crate) fn init_layer(fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Layer {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let weights = Matrix::new(fan_in, fan_out, rng.uniform(-limit, limit, fan_in * fan_out))
        .expect("sized by construction");
    Layer {
        weights,
        bias: vec![0.0; fan_out],
        frozen: false,
    }
}

/// Everything the backward pass needs from a forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// `activations[0]` is the batch itself; `activations[l + 1]` is the output of layer `l`.
    pub activations: Vec<Matrix>,
    /// `pre_activations[l]` is `a_l W_l + b_l`.
    pub pre_activations: Vec<Matrix>,
    bottleneck: usize,
}

impl ForwardTrace {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("at least one layer")
    }

    pub fn bottleneck(&self) -> &Matrix {
        &self.activations[self.bottleneck]
    }
}

fn check_batch(spec: &NetworkSpec, batch: &Matrix) -> Result<()> {
    if batch.cols() != spec.input_dim() {
        return Err(Error::contract(format!(
            "batch has {} features, network expects {}",
            batch.cols(),
            spec.input_dim()
        )));
    }
    Ok(())
}

fn layer_forward(layer: &Layer, act: Activation, input: &Matrix) -> (Matrix, Matrix) {
    let mut z = input.matmul(&layer.weights).expect("shapes checked");
    z.add_row_vector(&layer.bias);
    let a = if act == Activation::Identity { z.clone() } else { z.map(|v| act.apply(v)) };
    (z, a)
}

pub fn forward(params: &ModelParams, spec: &NetworkSpec, batch: &Matrix) -> Result<ForwardTrace> {
    params.check_shapes(spec)?;
    check_batch(spec, batch)?;
    let mut activations = Vec::with_capacity(spec.n_layers() + 1);
    let mut pre = Vec::with_capacity(spec.n_layers());
    activations.push(batch.clone());
    for (layer, &act) in params.layers.iter().zip(&spec.activations) {
        let (z, a) = layer_forward(layer, act, activations.last().unwrap());
        pre.push(z);
        activations.push(a);
    }
    Ok(ForwardTrace {
        activations,
        pre_activations: pre,
        bottleneck: spec.bottleneck,
    })
}

/// Runs the first `upto` layers and returns the last activations.
pub fn forward_partial(params: &ModelParams, spec: &NetworkSpec, batch: &Matrix, upto: usize) -> Result<Matrix> {
    params.check_shapes(spec)?;
    check_batch(spec, batch)?;
    if upto > spec.n_layers() {
        return Err(Error::contract(format!("only {} layers", spec.n_layers())));
    }
    let mut a = batch.clone();
    for (layer, &act) in params.layers.iter().zip(&spec.activations).take(upto) {
        a = layer_forward(layer, act, &a).1;
    }
    Ok(a)
}

/// Bottleneck activations `g(x)`.
pub fn encode(params: &ModelParams, spec: &NetworkSpec, batch: &Matrix) -> Result<Matrix> {
    forward_partial(params, spec, batch, spec.bottleneck)
}

/// Network output `f(x)`.
pub fn predict(params: &ModelParams, spec: &NetworkSpec, batch: &Matrix) -> Result<Matrix> {
    forward_partial(params, spec, batch, spec.n_layers())
}

/// Gradient of one layer's weights and bias.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }
}

/// Backpropagates `output_delta = dLoss/dOutput` through the network.
///
/// Frozen layers receive all-zero gradients; the delta still flows through
/// them whenever an unfrozen layer sits below.
pub fn backward(
    params: &ModelParams,
    spec: &NetworkSpec,
    trace: &ForwardTrace,
    output_delta: &Matrix,
) -> Result<Gradients> {
    params.check_shapes(spec)?;
    if output_delta.shape() != trace.output().shape() {
        return Err(Error::contract(format!(
            "output delta {:?} does not match output {:?}",
            output_delta.shape(),
            trace.output().shape()
        )));
    }
    let n_layers = spec.n_layers();
    let lowest_trainable = params.layers.iter().position(|l| !l.frozen);
    let mut grads = Gradients::zeros_like(params);
    let Some(lowest) = lowest_trainable else {
        return Ok(grads);
    };

    let mut delta = output_delta.clone();
    apply_derivative(&mut delta, spec.activations[n_layers - 1], &trace.pre_activations[n_layers - 1], trace.output());

    for l in (lowest..n_layers).rev() {
        let input = &trace.activations[l];
        if !params.layers[l].frozen {
            grads.layers[l].weights = input.t_matmul(&delta)?;
            grads.layers[l].bias = delta.column_sums();
        }
        if l > lowest {
            let mut below = delta.matmul_t(&params.layers[l].weights)?;
            apply_derivative(&mut below, spec.activations[l - 1], &trace.pre_activations[l - 1], &trace.activations[l]);
            delta = below;
        }
    }
    Ok(grads)
}

fn apply_derivative(delta: &mut Matrix, act: Activation, pre: &Matrix, post: &Matrix) {
    if act == Activation::Identity {
        return;
    }
    for ((d, &z), &a) in delta.as_mut_slice().iter_mut().zip(pre.as_slice()).zip(post.as_slice()) {
        *d *= act.derivative(z, a);
    }
}
