use crate::error::{Error, Result};
use crate::network::{predict, ModelParams, NetworkSpec};
use crate::numerics::Matrix;

fn check_pair(outputs: &Matrix, targets: &Matrix) -> Result<()> {
    if outputs.shape() != targets.shape() {
        return Err(Error::contract(format!(
            "outputs {:?} and targets {:?} differ in shape",
            outputs.shape(),
            targets.shape()
        )));
    }
    if outputs.rows() == 0 {
        return Err(Error::contract("loss of an empty batch"));
    }
    Ok(())
}

fn squared_residual_sum(outputs: &Matrix, targets: &Matrix) -> f64 {
    outputs
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .map(|(o, t)| (t - o) * (t - o))
        .sum()
}

/// `(1 / 2N) * sum_i |targets_i - outputs_i|^2`.
///
/// With `targets` equal to the inputs this is the plain reconstruction loss.
pub fn ce_loss(outputs: &Matrix, targets: &Matrix) -> Result<f64> {
    check_pair(outputs, targets)?;
    Ok(squared_residual_sum(outputs, targets) / (2.0 * outputs.rows() as f64))
}

/// Gradient of [`ce_loss`] with respect to `outputs`: `(outputs - targets) / N`.
pub fn output_delta(outputs: &Matrix, targets: &Matrix) -> Result<Matrix> {
    check_pair(outputs, targets)?;
    let inv_n = 1.0 / outputs.rows() as f64;
    let data = outputs
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .map(|(o, t)| (o - t) * inv_n)
        .collect();
    Matrix::new(outputs.rows(), outputs.cols(), data)
}

const LOSS_CHUNK: usize = 1024;

/// [`ce_loss`] of the network over a whole dataset, evaluated in row chunks.
pub fn dataset_loss(params: &ModelParams, spec: &NetworkSpec, inputs: &Matrix, targets: &Matrix) -> Result<f64> {
    if inputs.rows() != targets.rows() || targets.cols() != spec.widths()[spec.n_layers()] {
        return Err(Error::contract("inputs and targets are not row-aligned"));
    }
    if inputs.rows() == 0 {
        return Err(Error::contract("loss of an empty dataset"));
    }
    let mut sum = 0.0;
    let rows: Vec<usize> = (0..inputs.rows()).collect();
    for chunk in rows.chunks(LOSS_CHUNK) {
        let out = predict(params, spec, &inputs.select_rows(chunk))?;
        for (o, t) in out.as_slice().iter().zip(targets.select_rows(chunk).as_slice()) {
            sum += (t - o) * (t - o);
        }
    }
    Ok(sum / (2.0 * inputs.rows() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    #[test]
    fn perfect_fit_is_zero() {
        let a = Matrix::from_fn(3, 2, |i, j| (i * j) as f64);
        assert_eq!(ce_loss(&a, &a).unwrap(), 0.0);
        assert_eq!(output_delta(&a, &a).unwrap(), Matrix::zeros(3, 2));
    }

    #[test]
    fn hand_arithmetic() {
        let out = Matrix::from_rows(&[[2.0, 0.0], [1.0, 1.0]]).unwrap();
        let tgt = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(ce_loss(&out, &tgt).unwrap(), 1.0);
        let out = Matrix::from_rows(&[[3.0, -1.0]]).unwrap();
        let tgt = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert_eq!(output_delta(&out, &tgt).unwrap().as_slice(), &[2.0, -2.0]);
    }

    #[test]
    fn matches_scalar_double_loop() {
        let mut rng = SeededRng::new(11);
        let out = Matrix::new(10, 3, rng.uniform(-2.0, 2.0, 30)).unwrap();
        let tgt = Matrix::new(10, 3, rng.uniform(-2.0, 2.0, 30)).unwrap();
        let mut sum = 0.0;
        for i in 0..10 {
            let mut row = 0.0;
            for j in 0..3 {
                let d = tgt[(i, j)] - out[(i, j)];
                row += d * d;
            }
            sum += row;
        }
        let oracle = sum / 20.0;
        assert!((ce_loss(&out, &tgt).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn delta_matches_finite_differences() {
        let mut rng = SeededRng::new(12);
        let out = Matrix::new(4, 3, rng.uniform(-1.0, 1.0, 12)).unwrap();
        let tgt = Matrix::new(4, 3, rng.uniform(-1.0, 1.0, 12)).unwrap();
        let delta = output_delta(&out, &tgt).unwrap();
        let h = 1e-6;
        for idx in 0..12 {
            let mut plus = out.clone();
            plus.as_mut_slice()[idx] += h;
            let mut minus = out.clone();
            minus.as_mut_slice()[idx] -= h;
            let fd = (ce_loss(&plus, &tgt).unwrap() - ce_loss(&minus, &tgt).unwrap()) / (2.0 * h);
            assert!((fd - delta.as_slice()[idx]).abs() < 1e-8);
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(ce_loss(&Matrix::zeros(2, 2), &Matrix::zeros(2, 3)).is_err());
        assert!(output_delta(&Matrix::zeros(0, 2), &Matrix::zeros(0, 2)).is_err());
    }
}
