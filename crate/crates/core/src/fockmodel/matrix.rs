use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sparse complex matrix in compressed-row form.
///
/// Entries are always finite; constructors reject NaN and infinities.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// and dropping entries that cancel to exactly zero.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(format!("entry ({r}, {c})")));
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { rows, cols, indptr, indices, values };
        m.prune();
        Ok(m)
    }

    pub fn from_dense(a: &DMatrix<C64>) -> Result<Self> {
        let mut t = Vec::new();
        for c in 0..a.ncols() {
            for r in 0..a.nrows() {
                let v = a[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), t)
    }

    fn prune(&mut self) {
        let zero = C64::new(0.0, 0.0);
        if self.values.iter().all(|&v| v != zero) {
            return;
        }
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.values[p] != zero {
                    indices.push(self.indices[p]);
                    values.push(self.values[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |p| (r, self.indices[p], self.values[p]))
        })
    }

    /// Nonzero entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |p| (self.indices[p], self.values[p]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match span.binary_search(&c) {
            Ok(p) => self.values[self.indptr[r] + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A* x`.
    pub fn adjoint_matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (r, &xr) in x.iter().enumerate() {
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p]] += self.values[p].conj() * xr;
            }
        }
    }

    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.cols];
        self.adjoint_matvec_into(x, &mut y);
        y
    }

    pub fn adjoint(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, t).expect("adjoint of a valid matrix")
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune();
        out
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: C64, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        let t: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, s * v)))
            .collect();
        Self::from_triplets(self.rows, self.cols, t)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut t = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                t.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.rows, other.cols, t)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                t.push((r1 * other.rows + r2, c1 * other.cols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, t)
            .expect("Kronecker product of valid matrices")
    }

    /// The principal submatrix on the given index list.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.cols];
        for (new, &old) in idx.iter().enumerate() {
            pos[old] = new;
        }
        let mut t = Vec::new();
        for (new_r, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    t.push((new_r, pos[c], v));
                }
            }
        }
        Self::from_triplets(idx.len(), idx.len(), t).expect("submatrix of a valid matrix")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `‖A − A*‖_F`, an upper bound for the operator-norm defect.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).map_or(f64::INFINITY, |d| d.frobenius_norm())
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        let h = self.add(&self.adjoint())?;
        Ok(h.scale(C64::new(0.5, 0.0)))
    }

    pub(crate) fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_prune() {
        let m = ComplexMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 1.0)), (1, 0, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0, 1.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ComplexMatrix::from_triplets(1, 1, vec![(0, 0, c(f64::NAN, 0.0))]).is_err());
        assert!(ComplexMatrix::from_triplets(1, 1, vec![(1, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn products_match_dense() {
        let a = DMatrix::from_fn(3, 4, |i, j| c((i + 2 * j) as f64 - 3.0, (i * j) as f64 * 0.5));
        let b = DMatrix::from_fn(4, 2, |i, j| c(1.0 - i as f64, j as f64 + 0.25));
        let sa = ComplexMatrix::from_dense(&a).unwrap();
        let sb = ComplexMatrix::from_dense(&b).unwrap();
        let diff = sa.matmul(&sb).unwrap().to_dense() - &a * &b;
        assert!(diff.norm() < 1e-12);
        let diff = sa.adjoint().to_dense() - a.adjoint();
        assert!(diff.norm() < 1e-12);
        let x: Vec<C64> = (0..4).map(|i| c(i as f64, -1.0)).collect();
        let y = sa.matvec(&x);
        let yd = &a * DMatrix::from_column_slice(4, 1, &x);
        for i in 0..3 {
            assert!((y[i] - yd[(i, 0)]).norm() < 1e-12);
        }
        let z: Vec<C64> = (0..3).map(|i| c(0.5, i as f64)).collect();
        let w = sa.adjoint_matvec(&z);
        let wd = a.adjoint() * DMatrix::from_column_slice(3, 1, &z);
        for i in 0..4 {
            assert!((w[i] - wd[(i, 0)]).norm() < 1e-12);
        }
        let k = sa.kron(&sb).to_dense();
        assert_eq!(k.nrows(), 12);
        assert_eq!(k[(1 * 4 + 3, 2 * 2 + 1)], a[(1, 2)] * b[(3, 1)]);
    }

    #[test]
    fn hermitian_defect_detects_asymmetry() {
        let h = ComplexMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 2.0)), (1, 0, c(1.0, -2.0))])
            .unwrap();
        assert_eq!(h.hermitian_defect(), 0.0);
        let s = ComplexMatrix::from_triplets(2, 2, vec![(1, 0, c(1.0, 0.0))]).unwrap();
        assert!((s.hermitian_defect() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.hermitian_part().unwrap().hermitian_defect(), 0.0);
    }
}
