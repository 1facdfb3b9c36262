use crate::error::{Error, Result};
use crate::network::{Gradients, ModelParams};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn zeros(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// First and second moment estimates, one pair per weight and bias vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    weights: Vec<Moments>,
    biases: Vec<Moments>,
    t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            weights: params
                .layers
                .iter()
                .map(|l| Moments::zeros(l.weights.as_slice().len()))
                .collect(),
            biases: params.layers.iter().map(|l| Moments::zeros(l.bias.len())).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update.
///
/// `weight_decay * W` is added to each weight gradient (biases are not
/// decayed). Frozen layers are skipped entirely, moments included.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdamState,
    learning_rate: f64,
    weight_decay: f64,
) -> Result<()> {
    if grads.layers.len() != params.layers.len() || state.weights.len() != params.layers.len() {
        return Err(Error::contract("gradient, state and parameter layer counts differ"));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (l, layer) in params.layers.iter_mut().enumerate() {
        if layer.frozen {
            continue;
        }
        let g = &grads.layers[l];
        if g.weights.shape() != layer.weights.shape() || g.bias.len() != layer.bias.len() {
            return Err(Error::contract(format!("gradient shape mismatch in layer {l}")));
        }
        update(
            layer.weights.as_mut_slice(),
            g.weights.as_slice(),
            &mut state.weights[l],
            learning_rate,
            weight_decay,
            c1,
            c2,
        );
        update(&mut layer.bias, &g.bias, &mut state.biases[l], learning_rate, 0.0, c1, c2);
    }
    Ok(())
}

#[inline]
fn update(theta: &mut [f64], grad: &[f64], mom: &mut Moments, lr: f64, decay: f64, c1: f64, c2: f64) {
    for (((p, &g), m), v) in theta.iter_mut().zip(grad).zip(&mut mom.m).zip(&mut mom.v) {
        let g = g + decay * *p;
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_params, Activation, NetworkSpec};
    use crate::numerics::SeededRng;

    fn setup() -> (ModelParams, Gradients) {
        let spec = NetworkSpec::bottleneck(3, &[4], 2, Activation::Tanh).unwrap();
        let p = init_params(&spec, &mut SeededRng::new(1));
        let g = Gradients::zeros_like(&p);
        (p, g)
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let (mut p, g) = setup();
        let before = p.clone();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, 0.01, 0.0).unwrap();
        assert_eq!(p, before);
        assert_eq!(s.steps(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = g and v_hat = g^2 after one step, so the move is lr * g / (|g| + eps)
        let (mut p, mut g) = setup();
        for (i, lg) in g.layers.iter_mut().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            lg.weights.as_mut_slice().iter_mut().for_each(|v| *v = 0.3 * sign);
            lg.bias.iter_mut().for_each(|v| *v = -2.0 * sign);
        }
        let before = p.clone();
        let mut s = AdamState::new(&p);
        let lr = 1e-3;
        adam_step(&mut p, &g, &mut s, lr, 0.0).unwrap();
        for ((a, b), lg) in p.layers.iter().zip(&before.layers).zip(&g.layers) {
            for ((x, y), gr) in a.weights.as_slice().iter().zip(b.weights.as_slice()).zip(lg.weights.as_slice()) {
                let expected = -lr * gr / (gr.abs() + EPSILON);
                assert!((x - y - expected).abs() < 1e-15);
            }
            for ((x, y), gr) in a.bias.iter().zip(&b.bias).zip(&lg.bias) {
                assert!((x - y + lr * gr.signum()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn weight_decay_skips_biases() {
        let (mut p, g) = setup();
        p.layers[0].bias = vec![1.0; 4];
        let before = p.clone();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, 1e-2, 0.5).unwrap();
        assert_eq!(p.layers[0].bias, before.layers[0].bias);
        assert_ne!(p.layers[0].weights, before.layers[0].weights);
    }

    #[test]
    fn frozen_layer_is_bitwise_unchanged() {
        let (mut p, mut g) = setup();
        for lg in &mut g.layers {
            lg.weights.as_mut_slice().iter_mut().for_each(|v| *v = 0.7);
        }
        p.set_frozen(1, true);
        let before = p.clone();
        let mut s = AdamState::new(&p);
        for _ in 0..3 {
            adam_step(&mut p, &g, &mut s, 1e-2, 1e-3).unwrap();
        }
        assert_eq!(p.layers[1], before.layers[1]);
        assert_ne!(p.layers[0], before.layers[0]);
    }
}
