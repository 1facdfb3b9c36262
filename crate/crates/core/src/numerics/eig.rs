use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEig {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector of `values[i]`.
    pub vectors: Matrix,
}

const SYMMETRY_TOL: f64 = 1e-9;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigen-solver.
///
/// Sweeps rotate away every off-diagonal pair until the off-diagonal
/// Frobenius norm falls below `1e-12 * ‖s‖_F`. Each eigenvector's sign is
/// chosen so that its largest-magnitude component (first one on ties) is
/// positive.
pub fn sym_eig(s: &Matrix) -> Result<SymEig> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::contract(format!(
            "sym_eig needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let scale = s.max_abs().max(1.0);
    if !s.is_symmetric(SYMMETRY_TOL * scale) {
        return Err(Error::contract("sym_eig input is not symmetric"));
    }
    if !s.is_finite() {
        return Err(Error::contract("sym_eig input has non-finite entries"));
    }

    // Symmetrise exactly so row and column updates can share values.
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    // Rows of `vt` are the eigenvectors, which keeps their updates contiguous.
    let mut vt = Matrix::identity(n);

    let total = a.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * total;
    let mut buf_p = vec![0.0; n];
    let mut buf_q = vec![0.0; n];

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                {
                    let row_p = a.row(p);
                    let row_q = a.row(q);
                    for k in 0..n {
                        buf_p[k] = c * row_p[k] - sn * row_q[k];
                        buf_q[k] = sn * row_p[k] + c * row_q[k];
                    }
                }
                buf_p[p] = app - t * apq;
                buf_q[q] = aqq + t * apq;
                buf_p[q] = 0.0;
                buf_q[p] = 0.0;
                a.row_mut(p).copy_from_slice(&buf_p);
                a.row_mut(q).copy_from_slice(&buf_q);
                for k in 0..n {
                    a[(k, p)] = buf_p[k];
                    a[(k, q)] = buf_q[k];
                }

                let (vp, vq) = two_rows_mut(&mut vt, p, q);
                for k in 0..n {
                    let x = vp[k];
                    let y = vq[k];
                    vp[k] = c * x - sn * y;
                    vq[k] = sn * x + c * y;
                }
            }
        }
    }
    if off_diagonal_norm(&a) > target {
        return Err(Error::Numeric(format!(
            "Jacobi iteration did not converge within {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the original index order between equal eigenvalues
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));

    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = vt.row(i);
        let mut lead = 0;
        for k in 1..n {
            if v[k].abs() > v[lead].abs() {
                lead = k;
            }
        }
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[(k, col)] = sign * v[k];
        }
    }
    Ok(SymEig { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if i != j {
                sum += v * v;
            }
        }
    }
    sum.sqrt()
}

fn two_rows_mut(m: &mut Matrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let cols = m.cols();
    let (head, tail) = m.as_mut_slice().split_at_mut(q * cols);
    (&mut head[p * cols..(p + 1) * cols], &mut tail[..cols])
}
