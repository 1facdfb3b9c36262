//! Principal angles between column spaces.

use crate::error::{Error, Result};
use crate::numerics::{sym_eig, Matrix};

/// Orthonormal basis of the column space of `a` (modified Gram-Schmidt,
/// run twice for stability).
pub fn orthonormal_basis(a: &Matrix) -> Result<Matrix> {
    let (n, p) = a.shape();
    let scale = a.max_abs();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        let mut v = a.column(j);
        for _ in 0..2 {
            for u in &q {
                let d: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-10 * scale) {
            return Err(Error::Numeric(format!("column {j} is linearly dependent on the ones before it")));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    Ok(Matrix::from_fn(n, p, |i, j| q[j][i]))
}

/// Principal angles in radians between the column spaces of `a` and `b`,
/// ascending; there are `min(rank a, rank b)` of them.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.rows() != b.rows() {
        return Err(Error::contract(format!(
            "subspaces of R^{} and R^{} cannot be compared",
            a.rows(),
            b.rows()
        )));
    }
    let qa = orthonormal_basis(a)?;
    let qb = orthonormal_basis(b)?;
    let m = qa.t_matmul(&qb)?;
    let gram = if m.rows() <= m.cols() { m.matmul_t(&m)? } else { m.t_matmul(&m)? };
    let eig = sym_eig(&gram)?;
    Ok(eig
        .values
        .iter()
        .map(|&s2| s2.clamp(0.0, 1.0).sqrt().acos())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_and_tilted_line() {
        let plane = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let t = 0.3f64;
        let line = Matrix::from_rows(&[[t.cos()], [0.0], [t.sin()]]).unwrap();
        let angles = principal_angles(&plane, &line).unwrap();
        assert_eq!(angles.len(), 1);
        assert!((angles[0] - t).abs() < 1e-12);
    }

    #[test]
    fn same_span_different_basis() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0], [3.0, -1.0], [1.0, 1.0]]).unwrap();
        let mix = Matrix::from_rows(&[[2.0, 1.0], [-1.0, 3.0]]).unwrap();
        let b = a.matmul(&mix).unwrap();
        for angle in principal_angles(&a, &b).unwrap() {
            assert!(angle < 1e-6, "{angle}");
        }
    }

    #[test]
    fn orthogonal_spaces_and_rank_deficiency() {
        let a = Matrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.0], [5.0]]).unwrap();
        let angle = principal_angles(&a, &b).unwrap()[0];
        assert!((angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let dup = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert!(matches!(orthonormal_basis(&dup), Err(Error::Numeric(_))));
    }
}
