//! Compares backpropagated gradients with central finite differences of the
//! loss on random small networks. Coordinates where a relu pre-activation
//! changes sign inside the difference stencil are skipped.
//!
//!     cargo run --release --example gradient_check [-- instances]

use centroid_encoder::network::{backward, forward, init_params, Activation, ModelParams, NetworkSpec};
use centroid_encoder::training::{ce_loss, output_delta};
use centroid_encoder::{Matrix, SeededRng};

const H: f64 = 1e-5;
const TOLERANCE: f64 = 1e-6;

fn loss(params: &ModelParams, spec: &NetworkSpec, x: &Matrix, t: &Matrix) -> (f64, Vec<bool>) {
    let trace = forward(params, spec, x).expect("shapes match");
    let signs = trace
        .pre_activations
        .iter()
        .zip(spec.activations())
        .filter(|(_, &a)| a == Activation::Relu)
        .flat_map(|(z, _)| z.as_slice().iter().map(|&v| v > 0.0))
        .collect();
    (ce_loss(trace.output(), t).expect("shapes match"), signs)
}

fn coordinate(p: &mut ModelParams, layer: usize, c: usize) -> &mut f64 {
    let layer = &mut p.layers[layer];
    let n_weights = layer.weights.as_slice().len();
    if c < n_weights {
        &mut layer.weights.as_mut_slice()[c]
    } else {
        &mut layer.bias[c - n_weights]
    }
}

fn main() -> centroid_encoder::Result<()> {
    let instances: usize = std::env::args().nth(1).map_or(50, |s| s.parse().expect("count must be an integer"));
    let mut rng = SeededRng::new(2024);
    let (mut checked, mut passed, mut skipped) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for case in 0..instances {
        let depth = 1 + rng.below(4);
        let input = 1 + rng.below(8);
        let mut widths = vec![input];
        widths.extend((0..depth).map(|_| 1 + rng.below(20)));
        widths.push(input);
        let act = if case % 2 == 0 { Activation::Tanh } else { Activation::Relu };
        let mut acts = vec![act; depth + 1];
        acts[depth] = Activation::Identity;
        let spec = NetworkSpec::new(widths, acts, 1 + rng.below(depth))?;

        let mut params = init_params(&spec, &mut rng);
        for layer in &mut params.layers {
            layer.bias = rng.uniform(-0.5, 0.5, layer.bias.len());
        }
        let n = 1 + rng.below(6);
        let x = Matrix::new(n, input, rng.uniform(-1.0, 1.0, n * input))?;
        let t = Matrix::new(n, input, rng.uniform(-1.0, 1.0, n * input))?;

        let trace = forward(&params, &spec, &x)?;
        let grads = backward(&params, &spec, &trace, &output_delta(trace.output(), &t)?)?;

        for l in 0..params.layers.len() {
            let n_weights = params.layers[l].weights.as_slice().len();
            for c in 0..n_weights + params.layers[l].bias.len() {
                let mut plus = params.clone();
                let mut minus = params.clone();
                *coordinate(&mut plus, l, c) += H;
                *coordinate(&mut minus, l, c) -= H;
                let (fp, sp) = loss(&plus, &spec, &x, &t);
                let (fm, sm) = loss(&minus, &spec, &x, &t);
                if sp != sm {
                    skipped += 1;
                    continue;
                }
                let numeric = (fp - fm) / (2.0 * H);
                let g = &grads.layers[l];
                let analytic = if c < n_weights { g.weights.as_slice()[c] } else { g.bias[c - n_weights] };
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                checked += 1;
                passed += usize::from(rel < TOLERANCE);
            }
        }
    }
    println!(
        "{instances} networks: {passed}/{checked} coordinates within {TOLERANCE:e} ({:.3}%), {skipped} skipped at relu kinks, worst {worst:.2e}",
        100.0 * passed as f64 / checked as f64
    );
    Ok(())
}
