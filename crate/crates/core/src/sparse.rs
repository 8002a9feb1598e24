//! Compressed sparse row storage for symmetric scalar matrices.
//!
//! Both triangles are stored so that row and column access coincide and a
//! matrix-vector product is a single pass. Column indices within a row are
//! sorted, which makes entry lookup a binary search.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SymCsr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymCsr {
    /// Zero matrix with the given symmetric pattern. `rows[i]` lists the
    /// column indices of row `i`; the diagonal is always included.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, r) in rows.iter().enumerate() {
            let mut cols = r.clone();
            cols.push(i);
            cols.sort_unstable();
            cols.dedup();
            debug_assert!(cols.iter().all(|&c| c < n));
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    /// Same pattern, all values zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        let cols = &self.col_idx[start..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds `v` to entry `(i, j)` only (not to `(j, i)`).
    ///
    /// Panics if the entry is outside the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[p] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal().into_iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x` for a scalar vector.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    /// `y = (A ⊗ I_3) x` on interleaved vectors of length `3 n`.
    pub fn mul_vec3(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), 3 * self.n);
        assert_eq!(y.len(), 3 * self.n);
        for i in 0..self.n {
            let mut s = [0.0; 3];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[p];
                let j = self.col_idx[p];
                s[0] += a * x[3 * j];
                s[1] += a * x[3 * j + 1];
                s[2] += a * x[3 * j + 2];
            }
            y[3 * i..3 * i + 3].copy_from_slice(&s);
        }
    }

    /// Scales all values.
    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += s * other`; the patterns must be identical.
    pub fn axpy(&mut self, s: f64, other: &SymCsr) {
        assert!(self.same_pattern(other), "axpy requires identical patterns");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn same_pattern(&self, other: &SymCsr) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// Principal submatrix on `keep` (indices in increasing order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> SymCsr {
        let mut rank = vec![usize::MAX; self.n];
        for (r, &i) in keep.iter().enumerate() {
            rank[i] = r;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &i in keep {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = rank[self.col_idx[p]];
                if j != usize::MAX {
                    col_idx.push(j);
                    values.push(self.values[p]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SymCsr {
            n: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Largest asymmetry `max |a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Hash of the sparsity structure only.
    pub fn pattern_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.n.hash(&mut h);
        self.row_ptr.hash(&mut h);
        self.col_idx.hash(&mut h);
        h.finish()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Dense `(A ⊗ I_3)` on interleaved indices.
    pub fn to_dense3(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(3 * self.n, 3 * self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                for k in 0..3 {
                    d[(3 * i + k, 3 * j + k)] += v;
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SymCsr {
        let mut a = SymCsr::from_pattern(&[vec![1], vec![0, 2], vec![1]]);
        for (i, j, v) in [(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0)] {
            a.add(i, j, v);
        }
        a
    }

    #[test]
    fn matvec_and_dense_agree() {
        let a = path3();
        let x = [1.0, 2.0, 4.0];
        let mut y = [0.0; 3];
        a.mul_vec(&x, &mut y);
        assert_eq!(y, [0.0, -1.0, 6.0]);
        let d = a.to_dense();
        assert_eq!(d[(0, 1)], -1.0);
        assert_eq!(d[(0, 2)], 0.0);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn kron3_matvec() {
        let a = path3();
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let mut y = vec![0.0; 9];
        a.mul_vec3(&x, &mut y);
        let yd = a.to_dense3() * nalgebra::DVector::from_vec(x);
        for i in 0..9 {
            assert_eq!(y[i], yd[i]);
        }
    }

    #[test]
    fn submatrix() {
        let a = path3();
        let s = a.principal_submatrix(&[0, 2]);
        assert_eq!(s.n(), 2);
        assert_eq!(s.to_dense(), DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    #[should_panic]
    fn add_outside_pattern_panics() {
        let mut a = path3();
        a.add(0, 2, 1.0);
    }
}
