//! Dense symmetric-indefinite `P A Pᵀ = L D Lᵀ` with Bunch-Kaufman
//! 1x1 / 2x2 pivoting.

use nalgebra::{DMatrix, DVector, Matrix2};

use super::Inertia;

#[derive(Clone, Copy, Debug)]
enum Block {
    One(f64),
    Two(Matrix2<f64>),
}

/// A pivot whose magnitude fell below the singularity threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct SmallPivot {
    /// Index into the original (unpermuted) matrix.
    pub index: usize,
    pub magnitude: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct BunchKaufman {
    perm: Vec<usize>,
    l: DMatrix<f64>,
    /// Block start positions and blocks.
    blocks: Vec<(usize, Block)>,
}

fn swap_sym(a: &mut DMatrix<f64>, i: usize, j: usize) {
    if i != j {
        a.swap_rows(i, j);
        a.swap_columns(i, j);
    }
}

fn min_abs_eigenvalue(d: &Matrix2<f64>) -> f64 {
    let tr = d[(0, 0)] + d[(1, 1)];
    let det = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
    let disc = ((d[(0, 0)] - d[(1, 1)]).powi(2) + 4.0 * d[(0, 1)] * d[(1, 0)]).max(0.0).sqrt();
    let big = 0.5 * (tr.abs() + disc);
    if big == 0.0 {
        0.0
    } else {
        det.abs() / big
    }
}

impl BunchKaufman {
    /// Factors the symmetric matrix `a`. Fails with the first pivot whose
    /// smallest eigenvalue magnitude is below `tol`.
    pub fn factor(a: &DMatrix<f64>, tol: f64) -> Result<Self, SmallPivot> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let alpha = (1.0 + 17f64.sqrt()) / 8.0;
        let mut a = a.clone();
        let mut l = DMatrix::identity(n, n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();
        let mut k = 0;
        while k < n {
            let absakk = a[(k, k)].abs();
            let (imax, colmax) = (k + 1..n).fold((k, 0.0), |(im, m), i| {
                let v = a[(i, k)].abs();
                if v > m {
                    (i, v)
                } else {
                    (im, m)
                }
            });
            let (kp, kstep) = if absakk >= alpha * colmax {
                (k, 1)
            } else {
                let rowmax = (k..n)
                    .filter(|&j| j != imax)
                    .fold(0.0f64, |m, j| m.max(a[(imax, j)].abs()));
                if absakk * rowmax >= alpha * colmax * colmax {
                    (k, 1)
                } else if a[(imax, imax)].abs() >= alpha * rowmax {
                    (imax, 1)
                } else {
                    (imax, 2)
                }
            };
            let kk = k + kstep - 1;
            if kp != kk {
                swap_sym(&mut a, kk, kp);
                perm.swap(kk, kp);
                for c in 0..k {
                    let t = l[(kk, c)];
                    l[(kk, c)] = l[(kp, c)];
                    l[(kp, c)] = t;
                }
            }
            if kstep == 1 {
                let d = a[(k, k)];
                if d.abs() < tol {
                    return Err(SmallPivot {
                        index: perm[k],
                        magnitude: d.abs(),
                    });
                }
                for i in k + 1..n {
                    l[(i, k)] = a[(i, k)] / d;
                }
                for j in k + 1..n {
                    let ajk = a[(j, k)];
                    if ajk == 0.0 {
                        continue;
                    }
                    for i in k + 1..n {
                        a[(i, j)] -= l[(i, k)] * ajk;
                    }
                }
                blocks.push((k, Block::One(d)));
            } else {
                let d = Matrix2::new(a[(k, k)], a[(k, k + 1)], a[(k + 1, k)], a[(k + 1, k + 1)]);
                let m = min_abs_eigenvalue(&d);
                if m < tol {
                    return Err(SmallPivot {
                        index: perm[k],
                        magnitude: m,
                    });
                }
                let dinv = d.try_inverse().ok_or(SmallPivot {
                    index: perm[k],
                    magnitude: 0.0,
                })?;
                for i in k + 2..n {
                    let (x, y) = (a[(i, k)], a[(i, k + 1)]);
                    l[(i, k)] = x * dinv[(0, 0)] + y * dinv[(1, 0)];
                    l[(i, k + 1)] = x * dinv[(0, 1)] + y * dinv[(1, 1)];
                }
                for j in k + 2..n {
                    let (x, y) = (a[(j, k)], a[(j, k + 1)]);
                    for i in k + 2..n {
                        a[(i, j)] -= l[(i, k)] * x + l[(i, k + 1)] * y;
                    }
                }
                blocks.push((k, Block::Two(d)));
            }
            k += kstep;
        }
        Ok(Self { perm, l, blocks })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let mut y = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for i in j + 1..n {
                    y[i] -= self.l[(i, j)] * yj;
                }
            }
        }
        for &(k, block) in &self.blocks {
            match block {
                Block::One(d) => y[k] /= d,
                Block::Two(d) => {
                    let det = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
                    let (p, q) = (y[k], y[k + 1]);
                    y[k] = (d[(1, 1)] * p - d[(0, 1)] * q) / det;
                    y[k + 1] = (d[(0, 0)] * q - d[(1, 0)] * p) / det;
                }
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for i in j + 1..n {
                s -= self.l[(i, j)] * y[i];
            }
            y[j] = s;
        }
        let mut x = DVector::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }

    pub fn inertia(&self) -> Inertia {
        let mut inertia = Inertia::default();
        for &(_, block) in &self.blocks {
            match block {
                Block::One(d) => inertia.add_sign(d, 1),
                Block::Two(d) => {
                    let det = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
                    if det < 0.0 {
                        inertia.positive += 1;
                        inertia.negative += 1;
                    } else {
                        let tr = d[(0, 0)] + d[(1, 1)];
                        inertia.add_sign(tr, 2);
                    }
                }
            }
        }
        inertia
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::rng;
    use rand::Rng;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut r = rng(seed);
        let m = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        &m + m.transpose()
    }

    #[test]
    fn solves_random_indefinite_systems() {
        for seed in 0..10 {
            let a = random_sym(12, seed);
            let f = BunchKaufman::factor(&a, 1e-14).unwrap();
            let b = DVector::from_fn(12, |i, _| (i as f64).sin());
            let x = f.solve(&b);
            assert!((&a * &x - &b).amax() < 1e-10 * (1.0 + x.amax()));
            let eig = a.clone().symmetric_eigenvalues();
            let inertia = f.inertia();
            assert_eq!(inertia.positive, eig.iter().filter(|&&e| e > 0.0).count());
            assert_eq!(inertia.negative, eig.iter().filter(|&&e| e < 0.0).count());
        }
    }

    #[test]
    fn zero_diagonal_needs_two_by_two_pivots() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0]);
        let f = BunchKaufman::factor(&a, 1e-14).unwrap();
        assert!(f.blocks.iter().any(|(_, b)| matches!(b, Block::Two(_))));
        let b = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        assert!((&a * f.solve(&b) - b).amax() < 1e-14);
        assert_eq!(f.inertia(), Inertia { positive: 1, zero: 0, negative: 2 });
    }

    #[test]
    fn saddle_inertia() {
        // [[I, aᵀ], [a, 0]] has inertia (n, 0, 1)
        let mut a = DMatrix::identity(5, 5);
        for i in 0..4 {
            a[(4, i)] = 1.0 + i as f64;
            a[(i, 4)] = 1.0 + i as f64;
        }
        a[(4, 4)] = 0.0;
        let f = BunchKaufman::factor(&a, 1e-14).unwrap();
        assert_eq!(f.inertia(), Inertia { positive: 4, zero: 0, negative: 1 });
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        assert!(BunchKaufman::factor(&a, 1e-12).is_err());
    }
}
