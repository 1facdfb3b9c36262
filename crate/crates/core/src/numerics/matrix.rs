use std::fmt;
use std::ops::{Index, IndexMut};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::contract(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, and a zero-column matrix still has rows
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Gathers the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps the leading `count` columns.
    pub fn leading_columns(&self, count: usize) -> Matrix {
        let count = count.min(self.cols);
        Matrix::from_fn(self.rows, count, |i, j| self[(i, j)])
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::contract(format!(
                "cannot stack {} columns onto {}",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        self.map(|v| v * factor)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::contract(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Adds `v` to every row.
    pub fn add_row_vector(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.cols, "row vector length");
        if self.cols == 0 {
            return;
        }
        for row in self.data.chunks_exact_mut(self.cols) {
            for (x, &b) in row.iter_mut().zip(v) {
                *x += b;
            }
        }
    }

    /// Column sums accumulated top to bottom.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.row_iter() {
            for (s, &x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.rows.max(1) as f64;
        self.column_sums().into_iter().map(|s| s / n).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest entrywise absolute difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Matrix) -> Option<f64> {
        if self.shape() != other.shape() {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        )
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::contract(format!(
                "matmul of {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(self, other, &mut out);
        Ok(out)
    }

    /// `selfᵀ * other` without materialising a caller-visible transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::contract(format!(
                "transposed matmul of {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.transpose().matmul(other)
    }

    /// `self * otherᵀ`.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::contract(format!(
                "matmul by transpose of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.matmul(&other.transpose())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.row_iter().take(8) {
            writeln!(f, "  {row:?}")?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

// Register tile and cache blocking for the product kernel. Every output entry
// is accumulated as c += a[i,k] * b[k,j] for k ascending, exactly like a
// scalar triple loop, so blocking and threading never change the bits.
const MR: usize = 4;
const NR: usize = 16;
const KC: usize = 256;
const MC: usize = 64;

fn gemm(a: &Matrix, b: &Matrix, c: &mut Matrix) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    let panels = n.div_ceil(NR);
    let mut packed = vec![0.0; KC * panels * NR];

    for k0 in (0..k).step_by(KC) {
        let kc = KC.min(k - k0);
        pack_b(b, k0, kc, &mut packed);
        let packed = &packed[..kc * panels * NR];

        c.data
            .par_chunks_mut(MC * n)
            .enumerate()
            .for_each_init(
                || vec![0.0; MC.div_ceil(MR) * MR * KC],
                |a_pack, (block, c_block)| {
                    let i0 = block * MC;
                    let mc = c_block.len() / n;
                    let strips = mc.div_ceil(MR);
                    pack_a(a, i0, mc, k0, kc, a_pack);
                    for p in 0..panels {
                        let j0 = p * NR;
                        let nr = NR.min(n - j0);
                        let b_panel = &packed[p * kc * NR..(p + 1) * kc * NR];
                        for s in 0..strips {
                            let a_panel = &a_pack[s * kc * MR..(s + 1) * kc * MR];
                            let rows = MR.min(mc - s * MR);
                            kernel(a_panel, b_panel, c_block, s * MR, rows, j0, nr, n);
                        }
                    }
                },
            );
    }
}

/// Copies `b[k0..k0+kc, :]` into column panels of width `NR`, zero padded.
fn pack_b(b: &Matrix, k0: usize, kc: usize, packed: &mut [f64]) {
    let n = b.cols;
    let panels = n.div_ceil(NR);
    for p in 0..panels {
        let j0 = p * NR;
        let nr = NR.min(n - j0);
        let dst = &mut packed[p * kc * NR..(p + 1) * kc * NR];
        for kk in 0..kc {
            let src = &b.data[(k0 + kk) * n + j0..(k0 + kk) * n + j0 + nr];
            let d = &mut dst[kk * NR..(kk + 1) * NR];
            d[..nr].copy_from_slice(src);
            d[nr..].fill(0.0);
        }
    }
}

/// Copies `a[i0..i0+mc, k0..k0+kc]` into strips of `MR` rows stored
/// column by column, zero padded.
fn pack_a(a: &Matrix, i0: usize, mc: usize, k0: usize, kc: usize, packed: &mut [f64]) {
    let lda = a.cols;
    for s in 0..mc.div_ceil(MR) {
        let dst = &mut packed[s * kc * MR..(s + 1) * kc * MR];
        for r in 0..MR {
            let row = s * MR + r;
            if row < mc {
                let src = &a.data[(i0 + row) * lda + k0..(i0 + row) * lda + k0 + kc];
                for (kk, &v) in src.iter().enumerate() {
                    dst[kk * MR + r] = v;
                }
            } else {
                for kk in 0..kc {
                    dst[kk * MR + r] = 0.0;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn kernel(
    a_panel: &[f64],
    b_panel: &[f64],
    c_block: &mut [f64],
    local_row: usize,
    rows: usize,
    j0: usize,
    nr: usize,
    n: usize,
) {
    let mut acc = [[0.0f64; NR]; MR];
    for (r, acc_row) in acc.iter_mut().enumerate().take(rows) {
        let start = (local_row + r) * n + j0;
        acc_row[..nr].copy_from_slice(&c_block[start..start + nr]);
    }
    for (av, bv) in a_panel.chunks_exact(MR).zip(b_panel.chunks_exact(NR)) {
        let av: &[f64; MR] = av.try_into().unwrap();
        let bv: &[f64; NR] = bv.try_into().unwrap();
        for r in 0..MR {
            for j in 0..NR {
                acc[r][j] = mul_add(av[r], bv[j], acc[r][j]);
            }
        }
    }
    for (r, acc_row) in acc.iter().enumerate().take(rows) {
        let start = (local_row + r) * n + j0;
        c_block[start..start + nr].copy_from_slice(&acc_row[..nr]);
    }
}

/// `a * b + c`, fused when the target has FMA. Either way the summation
/// order is unchanged.
#[inline(always)]
pub(crate) fn mul_add(a: f64, b: f64, c: f64) -> f64 {
    #[cfg(target_feature = "fma")]
    {
        a.mul_add(b, c)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        a * b + c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut c = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a[(i, k)] * b[(k, j)];
                }
                c[(i, j)] = s;
            }
        }
        c
    }

    // Same loop with the kernel's multiply-add, for bitwise comparisons.
    fn naive_fused(a: &Matrix, b: &Matrix) -> Matrix {
        Matrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).fold(0.0, |s, k| mul_add(a[(i, k)], b[(k, j)], s))
        })
    }

    fn random(rng: &mut SeededRng, r: usize, c: usize) -> Matrix {
        Matrix::new(r, c, rng.uniform(-1.0, 1.0, r * c)).unwrap()
    }

    #[test]
    fn identity_times_a_is_a() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.5]]).unwrap();
        assert_eq!(Matrix::identity(3).matmul(&a).unwrap(), a);
    }

    #[test]
    fn hand_product() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.as_slice(), &[2.0, 4.0]);
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = SeededRng::new(3);
        let a = random(&mut rng, 5, 7);
        let b = random(&mut rng, 7, 3);
        let diff = a.matmul(&b).unwrap().max_abs_diff(&naive(&a, &b)).unwrap();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn blocked_path_is_bitwise_equal_to_triple_loop() {
        // crosses the KC, MC, MR and NR block edges
        let mut rng = SeededRng::new(11);
        let a = random(&mut rng, 131, 530);
        let b = random(&mut rng, 530, 37);
        assert_eq!(a.matmul(&b).unwrap(), naive_fused(&a, &b));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::Contract(_))));
    }

    #[test]
    fn transposed_products() {
        let mut rng = SeededRng::new(5);
        let a = random(&mut rng, 6, 4);
        let b = random(&mut rng, 6, 3);
        let c = random(&mut rng, 5, 4);
        assert_eq!(a.t_matmul(&b).unwrap(), naive_fused(&a.transpose(), &b));
        assert_eq!(a.matmul_t(&c).unwrap(), naive_fused(&a, &c.transpose()));
    }

    #[test]
    fn empty_shapes() {
        let a = Matrix::zeros(0, 3);
        let b = Matrix::zeros(3, 2);
        assert_eq!(a.matmul(&b).unwrap().shape(), (0, 2));
        let a = Matrix::zeros(2, 0);
        let b = Matrix::zeros(0, 2);
        assert_eq!(a.matmul(&b).unwrap(), Matrix::zeros(2, 2));
    }
}
