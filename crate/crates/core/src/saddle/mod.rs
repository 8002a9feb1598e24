//! Bordered saddle-point systems
//!
//! ```text
//! [ P  Aᵀ ] [x]   [r]
//! [ A  0  ] [λ] = [w]
//! ```
//!
//! with `P = S ⊗ I₃` symmetric positive semidefinite on the interior DOFs
//! (`J`, or `M + τJ`) and `A` the `K x n` constraint Jacobian.
//!
//! The sparse backend factors `S` by an up-looking `LDLᵀ` under a
//! minimum-degree ordering. Pivots that are not safely positive (the
//! constant kernel of `J` on closed meshes) are delayed: their vertices join
//! the constraint rows in a small dense tail, whose Schur complement is
//! factored by Bunch-Kaufman with 1x1 and 2x2 pivots. The dense backend
//! applies Bunch-Kaufman to the whole bordered matrix and serves as the
//! reference in tests.

mod dense;
mod ldl;
mod ordering;

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::constraints::restrict_columns;
use crate::mesh::DofMap;
use crate::sparse::SymCsr;

use dense::BunchKaufman;
use ldl::{Numeric, Symbolic};

#[derive(Debug, Error)]
pub enum SaddleError {
    #[error("saddle matrix is numerically singular: pivot {magnitude:.3e} at {location}; {hint}")]
    Singular {
        magnitude: f64,
        location: String,
        hint: &'static str,
    },
    #[error("constraint row {0} is identically zero")]
    ZeroConstraintRow(usize),
    #[error("saddle residual {residual:.3e} exceeds tolerance {tolerance:.3e} after refinement")]
    Residual { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

const KERNEL_HINT: &str = "the primal block has an uncontrolled kernel, most likely translations; \
                           add a barycenter constraint or fix a Dirichlet boundary";
const RANK_HINT: &str = "the constraint rows are (nearly) linearly dependent on the free directions";

/// Counts of positive, zero and negative eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl Inertia {
    fn add_sign(&mut self, v: f64, count: usize) {
        if v > 0.0 {
            self.positive += count;
        } else if v < 0.0 {
            self.negative += count;
        } else {
            self.zero += count;
        }
    }

    fn merge(self, other: Inertia) -> Inertia {
        Inertia {
            positive: self.positive + other.positive,
            zero: self.zero + other.zero,
            negative: self.negative + other.negative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Sparse,
    Dense,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub backend: Backend,
    /// Required `‖rhs - K sol‖∞ / ‖rhs‖∞` after one refinement step.
    pub solver_tol: f64,
    /// Sparse pivots below `delay_tol * max diag` go to the dense tail.
    pub delay_tol: f64,
    /// Pivots below this (relative to the equilibrated scale) are singular.
    pub singular_tol: f64,
    /// When set, every factorized system is written there as MatrixMarket.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Sparse,
            solver_tol: 1e-9,
            delay_tol: 1e-10,
            singular_tol: 1e-12,
            dump_dir: None,
        }
    }
}

/// The bordered matrix `[[S ⊗ I₃, Aᵀ], [A, 0]]`.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    primal: SymCsr,
    constraints: DMatrix<f64>,
}

impl SaddleSystem {
    pub fn new(primal: SymCsr, constraints: DMatrix<f64>) -> Result<Self, SaddleError> {
        if constraints.ncols() != 3 * primal.n() {
            return Err(SaddleError::Dimension(format!(
                "constraint matrix has {} columns, primal block has {} DOFs",
                constraints.ncols(),
                3 * primal.n()
            )));
        }
        Ok(Self { primal, constraints })
    }

    /// Restricts an all-vertex scalar operator and a `K x 3N` Jacobian to
    /// the interior DOFs of `dofs`.
    pub fn from_global(scalar: &SymCsr, jacobian: &DMatrix<f64>, dofs: &DofMap) -> Result<Self, SaddleError> {
        Self::new(
            scalar.principal_submatrix(dofs.interior_vertices()),
            restrict_columns(jacobian, dofs),
        )
    }

    pub fn primal(&self) -> &SymCsr {
        &self.primal
    }

    pub fn constraints(&self) -> &DMatrix<f64> {
        &self.constraints
    }

    /// Number of primal unknowns `n`.
    pub fn n_primal(&self) -> usize {
        3 * self.primal.n()
    }

    /// Number of constraint rows `K`.
    pub fn n_constraints(&self) -> usize {
        self.constraints.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_primal() + self.n_constraints()
    }

    /// Bordered matrix-vector product.
    pub fn apply(&self, x: &DVector<f64>, lambda: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mut top = DVector::zeros(self.n_primal());
        self.primal.mul_vec3(x.as_slice(), top.as_mut_slice());
        top += self.constraints.tr_mul(lambda);
        (top, &self.constraints * x)
    }

    /// Maximum absolute row sum of the bordered matrix.
    pub fn norm_inf(&self) -> f64 {
        let a = &self.constraints;
        let primal = (0..self.primal.n()).flat_map(|i| {
            let s: f64 = self.primal.row(i).map(|(_, v)| v.abs()).sum();
            (0..3).map(move |k| s + a.column(3 * i + k).iter().map(|v| v.abs()).sum::<f64>())
        });
        let dual = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>());
        primal.chain(dual).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_primal();
        let k = self.n_constraints();
        let mut m = DMatrix::zeros(n + k, n + k);
        m.view_mut((0, 0), (n, n)).copy_from(&self.primal.to_dense3());
        m.view_mut((n, 0), (k, n)).copy_from(&self.constraints);
        m.view_mut((0, n), (n, k)).copy_from(&self.constraints.transpose());
        m
    }

    /// Diagonal equilibration: `1/√d` on primal DOFs (`d` the largest
    /// diagonal entry of `S`), `√d / ‖A_r‖` on constraint rows.
    fn scaling(&self) -> Result<(f64, Vec<f64>), SaddleError> {
        let maxdiag = self.primal.max_abs_diagonal();
        let d = if maxdiag > 0.0 { maxdiag } else { 1.0 };
        let rows = (0..self.n_constraints())
            .map(|r| {
                let norm = self.constraints.row(r).norm();
                if norm == 0.0 {
                    Err(SaddleError::ZeroConstraintRow(r))
                } else {
                    Ok(d.sqrt() / norm)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((1.0 / d.sqrt(), rows))
    }

    /// Lower triangle in MatrixMarket coordinate format (1-based).
    pub fn to_matrix_market(&self) -> String {
        let n = self.n_primal();
        let mut entries = Vec::new();
        for i in 0..self.primal.n() {
            for (j, v) in self.primal.row(i) {
                if j <= i && v != 0.0 {
                    for a in 0..3 {
                        entries.push((3 * i + a, 3 * j + a, v));
                    }
                }
            }
        }
        for r in 0..self.n_constraints() {
            for c in 0..n {
                let v = self.constraints[(r, c)];
                if v != 0.0 {
                    entries.push((n + r, c, v));
                }
            }
        }
        entries.sort_by_key(|&(i, j, _)| (j, i));
        let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(s, "{} {} {}", self.dim(), self.dim(), entries.len());
        for (i, j, v) in entries {
            let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
        }
        s
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<(), SaddleError> {
        let path = path.as_ref();
        fs::write(path, self.to_matrix_market()).map_err(|source| SaddleError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Solution `(x, λ)` with residuals recomputed by explicit multiplication.
#[derive(Clone, Debug)]
pub struct SaddleSolution {
    /// Interior DOFs.
    pub primal: DVector<f64>,
    pub multipliers: DVector<f64>,
    /// `‖P x + Aᵀλ - r‖∞`.
    pub primal_residual: f64,
    /// `‖A x - w‖∞`.
    pub dual_residual: f64,
}

#[derive(Debug)]
struct Plan {
    pattern_hash: u64,
    base_order: Vec<usize>,
    delayed: Vec<usize>,
    symbolic: Arc<Symbolic>,
}

/// Owns the symbolic analysis, which is reused while the primal sparsity
/// pattern stays the same.
#[derive(Debug, Default)]
pub struct SaddleSolver {
    options: SolverOptions,
    plan: Option<Plan>,
    symbolic_analyses: usize,
    factorizations: usize,
}

impl SaddleSolver {
    pub fn new(options: SolverOptions) -> Self {
        Self {
            options,
            plan: None,
            symbolic_analyses: 0,
            factorizations: 0,
        }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Number of symbolic analyses (orderings or elimination trees) so far.
    pub fn symbolic_analyses(&self) -> usize {
        self.symbolic_analyses
    }

    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Primal pattern hash of the cached symbolic analysis.
    pub fn pattern_hash(&self) -> Option<u64> {
        self.plan.as_ref().map(|p| p.pattern_hash)
    }

    /// Vertices (primal scalar indices) currently handled in the dense tail.
    pub fn delayed(&self) -> &[usize] {
        self.plan.as_ref().map_or(&[], |p| &p.delayed)
    }

    pub fn factorize(&mut self, system: &SaddleSystem) -> Result<SaddleFactorization, SaddleError> {
        if let Some(dir) = &self.options.dump_dir {
            system.write_matrix_market(dir.join(format!("saddle_{:04}.mtx", self.factorizations)))?;
        }
        self.factorizations += 1;
        let factor = match self.options.backend {
            Backend::Dense => Factor::Dense(DenseFactor::new(system, self.options.singular_tol)?),
            Backend::Sparse => Factor::Sparse(self.factor_sparse(system)?),
        };
        let inertia = match &factor {
            Factor::Dense(f) => f.bk.inertia(),
            Factor::Sparse(f) => f.inertia(),
        };
        Ok(SaddleFactorization {
            system: system.clone(),
            factor,
            inertia,
            solver_tol: self.options.solver_tol,
            norm_inf: system.norm_inf(),
        })
    }

    /// Ordering and elimination tree for the pattern of `primal`; a no-op if
    /// the cached analysis already matches.
    pub fn analyze(&mut self, primal: &SymCsr) {
        let s = primal;
        let hash = s.pattern_hash();
        if self.plan.as_ref().map(|p| p.pattern_hash) != Some(hash) {
            let adj: Vec<Vec<usize>> = (0..s.n()).map(|i| s.row(i).map(|(j, _)| j).collect()).collect();
            let base_order = ordering::minimum_degree(&adj);
            let symbolic = Arc::new(Symbolic::new(s, base_order.clone()));
            self.symbolic_analyses += 1;
            self.plan = Some(Plan {
                pattern_hash: hash,
                base_order,
                delayed: Vec::new(),
                symbolic,
            });
        }
    }

    fn factor_sparse(&mut self, system: &SaddleSystem) -> Result<SparseFactor, SaddleError> {
        let s = &system.primal;
        self.analyze(s);
        let plan = self.plan.as_mut().expect("plan was just set");
        let threshold = self.options.delay_tol * s.max_abs_diagonal();
        let numeric = loop {
            match Numeric::factor(&plan.symbolic, s, threshold) {
                Ok(num) => break num,
                Err(bad) => {
                    log::debug!("delaying pivot {} (value {:e})", bad.index, bad.value);
                    plan.delayed.push(bad.index);
                    plan.delayed.sort_unstable();
                    let order = plan
                        .base_order
                        .iter()
                        .copied()
                        .filter(|i| plan.delayed.binary_search(i).is_err())
                        .collect();
                    plan.symbolic = Arc::new(Symbolic::new(s, order));
                    self.symbolic_analyses += 1;
                }
            }
        };
        let symbolic = plan.symbolic.clone();
        let delayed = plan.delayed.clone();
        let tail = if delayed.is_empty() && system.n_constraints() == 0 {
            None
        } else {
            Some(Tail::new(system, &symbolic, &numeric, &delayed, self.options.singular_tol)?)
        };
        Ok(SparseFactor {
            symbolic,
            numeric,
            delayed,
            tail,
        })
    }
}

#[derive(Debug)]
enum Factor {
    Sparse(SparseFactor),
    Dense(DenseFactor),
}

#[derive(Debug)]
struct DenseFactor {
    scale: DVector<f64>,
    bk: BunchKaufman,
}

impl DenseFactor {
    fn new(system: &SaddleSystem, tol: f64) -> Result<Self, SaddleError> {
        let (sp, sr) = system.scaling()?;
        let n = system.n_primal();
        let scale = DVector::from_fn(system.dim(), |i, _| if i < n { sp } else { sr[i - n] });
        let m = DMatrix::from_diagonal(&scale) * system.to_dense() * DMatrix::from_diagonal(&scale);
        let bk = BunchKaufman::factor(&m, tol).map_err(|p| singular(p.magnitude, p.index, n))?;
        Ok(Self { scale, bk })
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.bk.solve(&rhs.component_mul(&self.scale)).component_mul(&self.scale)
    }
}

fn singular(magnitude: f64, index: usize, n_primal: usize) -> SaddleError {
    if index < n_primal {
        SaddleError::Singular {
            magnitude,
            location: format!("primal DOF {index}"),
            hint: KERNEL_HINT,
        }
    } else {
        SaddleError::Singular {
            magnitude,
            location: format!("constraint row {}", index - n_primal),
            hint: RANK_HINT,
        }
    }
}

/// Dense Schur complement of the delayed vertices and constraint rows.
#[derive(Debug)]
struct Tail {
    /// Coupling `S[:, d]` per delayed vertex, in elimination order.
    c: Vec<Vec<f64>>,
    /// Constraint rows split per vertex, in elimination order.
    a: Vec<Vec<[f64; 3]>>,
    /// `P⁻¹` applied to the columns above.
    wc: Vec<Vec<f64>>,
    wa: Vec<Vec<[f64; 3]>>,
    scale: DVector<f64>,
    bk: BunchKaufman,
}

impl Tail {
    fn new(
        system: &SaddleSystem,
        sym: &Symbolic,
        num: &Numeric,
        delayed: &[usize],
        tol: f64,
    ) -> Result<Self, SaddleError> {
        let s = &system.primal;
        let amat = &system.constraints;
        let ns = sym.n();
        let nd = delayed.len();
        let k = system.n_constraints();
        let m = 3 * nd + k;

        let c: Vec<Vec<f64>> = delayed
            .iter()
            .map(|&d| {
                let mut col = vec![0.0; ns];
                for (j, v) in s.row(d) {
                    let p = sym.position[j];
                    if p != usize::MAX {
                        col[p] = v;
                    }
                }
                col
            })
            .collect();
        let a: Vec<Vec<[f64; 3]>> = (0..k)
            .map(|r| {
                sym.order
                    .iter()
                    .map(|&v| [amat[(r, 3 * v)], amat[(r, 3 * v + 1)], amat[(r, 3 * v + 2)]])
                    .collect()
            })
            .collect();
        let wc: Vec<Vec<f64>> = c
            .iter()
            .map(|col| {
                let mut w = col.clone();
                num.solve(&mut w);
                w
            })
            .collect();
        let wa: Vec<Vec<[f64; 3]>> = a
            .iter()
            .map(|row| {
                let mut w = row.clone();
                num.solve3(&mut w);
                w
            })
            .collect();

        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let mut t = DMatrix::zeros(m, m);
        for (i, &di) in delayed.iter().enumerate() {
            for (j, &dj) in delayed.iter().enumerate() {
                let v = s.get(di, dj) - dot(&c[i], &wc[j]);
                for ax in 0..3 {
                    t[(3 * i + ax, 3 * j + ax)] = v;
                }
            }
            for r in 0..k {
                for ax in 0..3 {
                    let coupling: f64 = c[i].iter().zip(&wa[r]).map(|(ci, w)| ci * w[ax]).sum();
                    let v = amat[(r, 3 * di + ax)] - coupling;
                    t[(3 * i + ax, 3 * nd + r)] = v;
                    t[(3 * nd + r, 3 * i + ax)] = v;
                }
            }
        }
        for r in 0..k {
            for q in 0..k {
                let v: f64 = a[r]
                    .iter()
                    .zip(&wa[q])
                    .map(|(x, w)| x[0] * w[0] + x[1] * w[1] + x[2] * w[2])
                    .sum();
                t[(3 * nd + r, 3 * nd + q)] = -v;
            }
        }
        // symmetrize away roundoff in the -A P⁻¹ Aᵀ block
        let t = (&t + t.transpose()) * 0.5;

        let (sp, sr) = system.scaling()?;
        let scale = DVector::from_fn(m, |i, _| if i < 3 * nd { sp } else { sr[i - 3 * nd] });
        let scaled = DMatrix::from_diagonal(&scale) * t * DMatrix::from_diagonal(&scale);
        let bk = BunchKaufman::factor(&scaled, tol).map_err(|p| {
            if p.index < 3 * nd {
                SaddleError::Singular {
                    magnitude: p.magnitude,
                    location: format!("primal DOF {}", 3 * delayed[p.index / 3] + p.index % 3),
                    hint: KERNEL_HINT,
                }
            } else {
                SaddleError::Singular {
                    magnitude: p.magnitude,
                    location: format!("constraint row {}", p.index - 3 * nd),
                    hint: RANK_HINT,
                }
            }
        })?;
        Ok(Self {
            c,
            a,
            wc,
            wa,
            scale,
            bk,
        })
    }
}

#[derive(Debug)]
struct SparseFactor {
    symbolic: Arc<Symbolic>,
    numeric: Numeric,
    delayed: Vec<usize>,
    tail: Option<Tail>,
}

impl SparseFactor {
    fn inertia(&self) -> Inertia {
        let mut inertia = Inertia::default();
        for &d in &self.numeric.d {
            inertia.add_sign(d, 3);
        }
        match &self.tail {
            Some(t) => inertia.merge(t.bk.inertia()),
            None => inertia,
        }
    }

    fn solve(&self, rhs_p: &[f64], rhs_d: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let sym = &self.symbolic;
        let nd = self.delayed.len();
        let k = rhs_d.len();
        let mut y: Vec<[f64; 3]> = sym
            .order
            .iter()
            .map(|&v| [rhs_p[3 * v], rhs_p[3 * v + 1], rhs_p[3 * v + 2]])
            .collect();
        self.numeric.solve3(&mut y);
        let mut x = DVector::zeros(rhs_p.len());
        let mut lambda = DVector::zeros(k);
        if let Some(tail) = &self.tail {
            let mut t = DVector::zeros(3 * nd + k);
            for (i, &d) in self.delayed.iter().enumerate() {
                for ax in 0..3 {
                    let cy: f64 = tail.c[i].iter().zip(&y).map(|(c, yk)| c * yk[ax]).sum();
                    t[3 * i + ax] = rhs_p[3 * d + ax] - cy;
                }
            }
            for r in 0..k {
                let ay: f64 = tail.a[r]
                    .iter()
                    .zip(&y)
                    .map(|(a, yk)| a[0] * yk[0] + a[1] * yk[1] + a[2] * yk[2])
                    .sum();
                t[3 * nd + r] = rhs_d[r] - ay;
            }
            let xt = tail.bk.solve(&t.component_mul(&tail.scale)).component_mul(&tail.scale);
            for (p, yk) in y.iter_mut().enumerate() {
                for ax in 0..3 {
                    let mut s = 0.0;
                    for i in 0..nd {
                        s += tail.wc[i][p] * xt[3 * i + ax];
                    }
                    for r in 0..k {
                        s += tail.wa[r][p][ax] * xt[3 * nd + r];
                    }
                    yk[ax] -= s;
                }
            }
            for (i, &d) in self.delayed.iter().enumerate() {
                for ax in 0..3 {
                    x[3 * d + ax] = xt[3 * i + ax];
                }
            }
            for r in 0..k {
                lambda[r] = xt[3 * nd + r];
            }
        }
        for (p, &v) in sym.order.iter().enumerate() {
            for ax in 0..3 {
                x[3 * v + ax] = y[p][ax];
            }
        }
        (x, lambda)
    }
}

/// A factored saddle system; reusable for any number of right-hand sides.
#[derive(Debug)]
pub struct SaddleFactorization {
    system: SaddleSystem,
    factor: Factor,
    inertia: Inertia,
    solver_tol: f64,
    norm_inf: f64,
}

impl SaddleFactorization {
    pub fn system(&self) -> &SaddleSystem {
        &self.system
    }

    /// Expected `(n, 0, K)` whenever the constrained problem is well posed.
    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.factor, Factor::Sparse(_))
    }

    fn raw_solve(&self, rhs_p: &DVector<f64>, rhs_d: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        match &self.factor {
            Factor::Sparse(f) => f.solve(rhs_p.as_slice(), rhs_d.as_slice()),
            Factor::Dense(f) => {
                let n = rhs_p.len();
                let rhs = DVector::from_iterator(n + rhs_d.len(), rhs_p.iter().chain(rhs_d.iter()).copied());
                let sol = f.solve(&rhs);
                (sol.rows(0, n).into_owned(), sol.rows(n, rhs_d.len()).into_owned())
            }
        }
    }

    fn residual(
        &self,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        rhs_p: &DVector<f64>,
        rhs_d: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let (p, d) = self.system.apply(x, lambda);
        (rhs_p - p, rhs_d - d)
    }

    /// Solves with one step of iterative refinement and verifies the
    /// residual by explicit re-multiplication.
    ///
    /// The check is normwise: `‖r‖∞ ≤ tol · max(‖rhs‖∞, ‖K‖∞‖sol‖∞)`. For
    /// right-hand sides far smaller than `K·sol` the first term alone sits
    /// below roundoff.
    pub fn solve(&self, rhs_p: &DVector<f64>, rhs_d: &DVector<f64>) -> Result<SaddleSolution, SaddleError> {
        if rhs_p.len() != self.system.n_primal() || rhs_d.len() != self.system.n_constraints() {
            return Err(SaddleError::Dimension(format!(
                "right-hand side ({}, {}) for a system of size ({}, {})",
                rhs_p.len(),
                rhs_d.len(),
                self.system.n_primal(),
                self.system.n_constraints()
            )));
        }
        let (mut x, mut lambda) = self.raw_solve(rhs_p, rhs_d);
        let (rp, rd) = self.residual(&x, &lambda, rhs_p, rhs_d);
        let (dx, dl) = self.raw_solve(&rp, &rd);
        x += dx;
        lambda += dl;
        let (rp, rd) = self.residual(&x, &lambda, rhs_p, rhs_d);
        let scale = rhs_p.amax().max(rhs_d.amax()).max(self.norm_inf * x.amax().max(lambda.amax()));
        let residual = rp.amax().max(rd.amax());
        let tolerance = self.solver_tol * scale;
        if residual > tolerance {
            return Err(SaddleError::Residual { residual, tolerance });
        }
        Ok(SaddleSolution {
            primal: x,
            multipliers: lambda,
            primal_residual: rp.amax(),
            dual_residual: rd.amax(),
        })
    }

    /// Rhs `(b, 0)`: `x` is the `P`-orthogonal projection of `P⁻¹b` onto
    /// `ker A`.
    pub fn solve_projected_gradient(&self, b: &DVector<f64>) -> Result<SaddleSolution, SaddleError> {
        self.solve(b, &DVector::zeros(self.system.n_constraints()))
    }

    /// Rhs `(0, w)`: `x = A† w` with `A† = P⁻¹Aᵀ(AP⁻¹Aᵀ)⁻¹`.
    pub fn apply_pseudoinverse(&self, w: &DVector<f64>) -> Result<SaddleSolution, SaddleError> {
        self.solve(&DVector::zeros(self.system.n_primal()), w)
    }
}

/// Weighted pseudoinverse `A† = J⁻¹Aᵀ(AJ⁻¹Aᵀ)⁻¹` for SPD `J` and surjective
/// `A`, by dense Cholesky factorizations.
pub fn dense_pinv_oracle(j: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>, SaddleError> {
    let n = j.nrows();
    if j.ncols() != n || a.ncols() != n {
        return Err(SaddleError::Dimension(format!(
            "J is {}x{}, A is {}x{}",
            j.nrows(),
            j.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let cj = j.clone().cholesky().ok_or(SaddleError::Singular {
        magnitude: 0.0,
        location: "J".into(),
        hint: KERNEL_HINT,
    })?;
    let jinv_at = cj.solve(&a.transpose());
    let schur = a * &jinv_at;
    let cs = schur.cholesky().ok_or(SaddleError::Singular {
        magnitude: 0.0,
        location: "A J⁻¹ Aᵀ".into(),
        hint: RANK_HINT,
    })?;
    Ok(cs.solve(&jinv_at.transpose()).transpose())
}

/// `(I - A†A) J⁻¹ b` computed densely.
pub fn dense_projection_oracle(
    j: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<DVector<f64>, SaddleError> {
    let pinv = dense_pinv_oracle(j, a)?;
    let jinv_b = j.clone().cholesky().expect("checked by the oracle").solve(b);
    Ok(&jinv_b - &pinv * (a * &jinv_b))
}
