//! Up-looking sparse `LDLᵀ` without pivoting for a principal submatrix of
//! a scalar [`SymCsr`], with separate symbolic and numeric phases.
//!
//! The numeric phase stops at the first pivot that is not safely positive,
//! so the caller can move that node out of the sparse part.

use crate::sparse::SymCsr;

const NONE: usize = usize::MAX;

/// Elimination tree, column counts and the permuted upper-triangular access
/// pattern for one ordering of one matrix pattern.
#[derive(Clone, Debug)]
pub(crate) struct Symbolic {
    /// `order[k]`: matrix index eliminated at step `k`.
    pub order: Vec<usize>,
    /// Inverse of `order`; `NONE` for indices not in the sparse part.
    pub position: Vec<usize>,
    parent: Vec<usize>,
    lp: Vec<usize>,
    /// For permuted column `k`: entries `(i, src)` with `i <= k`, where
    /// `src` indexes the values of the source matrix.
    up_ptr: Vec<usize>,
    up: Vec<(usize, usize)>,
}

impl Symbolic {
    pub fn new(a: &SymCsr, order: Vec<usize>) -> Self {
        let n = order.len();
        let mut position = vec![NONE; a.n()];
        for (k, &i) in order.iter().enumerate() {
            position[i] = k;
        }
        let mut up_ptr = Vec::with_capacity(n + 1);
        let mut up = Vec::new();
        up_ptr.push(0);
        for (k, &row) in order.iter().enumerate() {
            let start = up.len();
            for p in a.row_ptr()[row]..a.row_ptr()[row + 1] {
                let i = position[a.col_idx()[p]];
                if i != NONE && i <= k {
                    up.push((i, p));
                }
            }
            up[start..].sort_unstable();
            up_ptr.push(up.len());
        }

        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &(mut i, _) in &up[up_ptr[k]..up_ptr[k + 1]] {
                if i == k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = Vec::with_capacity(n + 1);
        lp.push(0);
        for k in 0..n {
            lp.push(lp[k] + lnz[k]);
        }
        Self {
            order,
            position,
            parent,
            lp,
            up_ptr,
            up,
        }
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n()]
    }
}

/// Numeric factor `P A Pᵀ = L D Lᵀ`, `L` unit lower triangular by columns.
#[derive(Clone, Debug)]
pub(crate) struct Numeric {
    li: Vec<usize>,
    lx: Vec<f64>,
    lp: Vec<usize>,
    pub d: Vec<f64>,
}

/// Step and matrix index of a rejected pivot.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BadPivot {
    pub index: usize,
    pub value: f64,
}

impl Numeric {
    /// Factors; a pivot `<= threshold` aborts with its matrix index.
    pub fn factor(sym: &Symbolic, a: &SymCsr, threshold: f64) -> Result<Self, BadPivot> {
        let n = sym.n();
        let nnz = sym.nnz_l();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let values = a.values();
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for &(i0, src) in &sym.up[sym.up_ptr[k]..sym.up_ptr[k + 1]] {
                y[i0] += values[src];
                let mut len = 0;
                let mut i = i0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = sym.parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let end = sym.lp[i] + lnz[i];
                for p in sym.lp[i]..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let lki = yi / d[i];
                dk -= lki * yi;
                li[end] = k;
                lx[end] = lki;
                lnz[i] += 1;
            }
            if !(dk > threshold) {
                return Err(BadPivot {
                    index: sym.order[k],
                    value: dk,
                });
            }
            d[k] = dk;
        }
        Ok(Self {
            li,
            lx,
            lp: sym.lp.clone(),
            d,
        })
    }

    /// Solves in place for three interleaved right-hand sides in permuted
    /// order (`x[k]` belongs to step `k`).
    pub fn solve3(&self, x: &mut [[f64; 3]]) {
        let n = self.d.len();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                let l = self.lx[p];
                let r = &mut x[self.li[p]];
                r[0] -= l * xj[0];
                r[1] -= l * xj[1];
                r[2] -= l * xj[2];
            }
        }
        for (xj, &dj) in x.iter_mut().zip(&self.d) {
            xj[0] /= dj;
            xj[1] /= dj;
            xj[2] /= dj;
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                let l = self.lx[p];
                let r = x[self.li[p]];
                s[0] -= l * r[0];
                s[1] -= l * r[1];
                s[2] -= l * r[2];
            }
            x[j] = s;
        }
    }

    /// Scalar solve in permuted order.
    pub fn solve(&self, x: &mut [f64]) {
        let n = self.d.len();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for (xj, &dj) in x.iter_mut().zip(&self.d) {
            *xj /= dj;
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::ordering::minimum_degree;
    use crate::test_support::rng;
    use rand::Rng;

    /// Random sparse SPD matrix: graph Laplacian plus identity.
    fn random_spd(n: usize, seed: u64) -> SymCsr {
        let mut r = rng(seed);
        let mut rows = vec![vec![]; n];
        let mut edges = vec![];
        for i in 0..n {
            for _ in 0..2 {
                let j = r.random_range(0..n);
                if j != i {
                    rows[i].push(j);
                    rows[j].push(i);
                    edges.push((i, j, r.random_range(0.1..1.0)));
                }
            }
        }
        let mut a = SymCsr::from_pattern(&rows);
        for i in 0..n {
            a.add(i, i, 1.0);
        }
        for (i, j, w) in edges {
            a.add(i, i, w);
            a.add(j, j, w);
            a.add(i, j, -w);
            a.add(j, i, -w);
        }
        a
    }

    fn adjacency(a: &SymCsr) -> Vec<Vec<usize>> {
        (0..a.n()).map(|i| a.row(i).map(|(j, _)| j).collect()).collect()
    }

    #[test]
    fn factor_and_solve_match_dense() {
        for seed in 0..5 {
            let a = random_spd(40, seed);
            let order = minimum_degree(&adjacency(&a));
            let sym = Symbolic::new(&a, order.clone());
            let num = Numeric::factor(&sym, &a, 0.0).unwrap();
            let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).cos()).collect();
            let mut xp: Vec<f64> = order.iter().map(|&i| b[i]).collect();
            num.solve(&mut xp);
            let mut x = vec![0.0; 40];
            for (k, &i) in order.iter().enumerate() {
                x[i] = xp[k];
            }
            let mut ax = vec![0.0; 40];
            a.mul_vec(&x, &mut ax);
            let err = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{err}");

            let mut x3: Vec<[f64; 3]> = order.iter().map(|&i| [b[i], 2.0 * b[i], -b[i]]).collect();
            num.solve3(&mut x3);
            for k in 0..40 {
                assert!((x3[k][0] - xp[k]).abs() < 1e-14);
                assert!((x3[k][1] - 2.0 * xp[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn minimum_degree_reduces_fill() {
        let a = random_spd(200, 9);
        let natural = Symbolic::new(&a, (0..200).collect());
        let md = Symbolic::new(&a, minimum_degree(&adjacency(&a)));
        assert!(md.nnz_l() < natural.nnz_l());
    }

    #[test]
    fn singular_pivot_is_reported() {
        // path Laplacian without identity shift: constants in the kernel
        let n = 6;
        let rows: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![] }).collect();
        let mut rows2 = rows.clone();
        for (i, r) in rows.iter().enumerate() {
            for &j in r {
                rows2[j].push(i);
            }
        }
        let mut a = SymCsr::from_pattern(&rows2);
        for i in 0..n - 1 {
            a.add(i, i, 1.0);
            a.add(i + 1, i + 1, 1.0);
            a.add(i, i + 1, -1.0);
            a.add(i + 1, i, -1.0);
        }
        let sym = Symbolic::new(&a, (0..n).collect());
        let err = Numeric::factor(&sym, &a, 1e-10).unwrap_err();
        assert_eq!(err.index, n - 1);
        assert!(err.value.abs() < 1e-14);
    }
}
