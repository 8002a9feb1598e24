//! Equality constraints `Φ(f) = y₀` on the immersion: barycenter, total
//! area and enclosed volume, with Jacobians and their directional
//! derivatives in closed form.
//!
//! Dirichlet boundary conditions contribute no rows. They act through the
//! [`DofMap`], and Jacobian columns of fixed DOFs are zeroed.

use std::fmt;

use nalgebra::{DMatrix, DVector, Vector3};
use thiserror::Error;

use crate::fem::local::{LocalTriangle, V3};
use crate::mesh::{DofMap, TriMesh};

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("enclosed volume requires a closed mesh")]
    VolumeOnOpenMesh,
    #[error(
        "translations are not controlled: add a barycenter constraint or fix a boundary \
         (the saddle matrix would be singular)"
    )]
    TranslationKernel,
    #[error("constraint {kind} listed twice")]
    Duplicate { kind: ConstraintKind },
    #[error("constraint {kind} expects {expected} target value(s), got {got}")]
    TargetLength {
        kind: ConstraintKind,
        expected: usize,
        got: usize,
    },
    #[error("non-finite target for constraint {kind}")]
    NonFiniteTarget { kind: ConstraintKind },
    #[error("expected a displacement of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Barycenter,
    Area,
    Volume,
}

impl ConstraintKind {
    pub fn rows(self) -> usize {
        match self {
            ConstraintKind::Barycenter => 3,
            _ => 1,
        }
    }

    /// Physical dimension of the constrained quantity (length power).
    pub fn length_power(self) -> i32 {
        match self {
            ConstraintKind::Barycenter => 1,
            ConstraintKind::Area => 2,
            ConstraintKind::Volume => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Barycenter => "barycenter",
            ConstraintKind::Area => "area",
            ConstraintKind::Volume => "volume",
        }
    }

    /// Current value(s) of the constrained quantity.
    pub fn value(self, mesh: &TriMesh) -> Vec<f64> {
        match self {
            ConstraintKind::Barycenter => barycenter_value(mesh).as_slice().to_vec(),
            ConstraintKind::Area => vec![surface_area_value(mesh)],
            ConstraintKind::Volume => vec![enclosed_volume_value(mesh)],
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A requested constraint; `target = None` keeps the initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub target: Option<Vec<f64>>,
}

impl ConstraintSpec {
    pub fn keep(kind: ConstraintKind) -> Self {
        Self { kind, target: None }
    }

    pub fn with_target(kind: ConstraintKind, target: Vec<f64>) -> Self {
        Self {
            kind,
            target: Some(target),
        }
    }
}

/// Validated, ordered constraint stack with resolved targets.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    kinds: Vec<ConstraintKind>,
    targets: Vec<f64>,
    dirichlet: bool,
    length_scale: f64,
}

impl ConstraintSet {
    /// Resolves default targets from `mesh` and checks that the resulting
    /// saddle systems can be invertible. `length_scale` for residual scaling
    /// is the bounding-box diagonal of `mesh`.
    pub fn new(mesh: &TriMesh, specs: &[ConstraintSpec], dirichlet: bool) -> Result<Self, ConstraintError> {
        let mut kinds = Vec::with_capacity(specs.len());
        let mut targets = Vec::new();
        for spec in specs {
            if kinds.contains(&spec.kind) {
                return Err(ConstraintError::Duplicate { kind: spec.kind });
            }
            if spec.kind == ConstraintKind::Volume && !mesh.is_closed() {
                return Err(ConstraintError::VolumeOnOpenMesh);
            }
            let t = match &spec.target {
                Some(t) => {
                    if t.len() != spec.kind.rows() {
                        return Err(ConstraintError::TargetLength {
                            kind: spec.kind,
                            expected: spec.kind.rows(),
                            got: t.len(),
                        });
                    }
                    if t.iter().any(|v| !v.is_finite()) {
                        return Err(ConstraintError::NonFiniteTarget { kind: spec.kind });
                    }
                    t.clone()
                }
                None => spec.kind.value(mesh),
            };
            kinds.push(spec.kind);
            targets.extend(t);
        }
        let boundary_fixed = dirichlet && !mesh.is_closed();
        if !boundary_fixed && !kinds.contains(&ConstraintKind::Barycenter) {
            return Err(ConstraintError::TranslationKernel);
        }
        Ok(Self {
            kinds,
            targets,
            dirichlet,
            length_scale: mesh.bounding_box_diagonal(),
        })
    }

    pub fn kinds(&self) -> &[ConstraintKind] {
        &self.kinds
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Number of rows `K`.
    pub fn n_rows(&self) -> usize {
        self.kinds.iter().map(|k| k.rows()).sum()
    }

    /// Per-row factor `ℓ^{-d}` making residuals dimensionless.
    pub fn row_scales(&self) -> Vec<f64> {
        self.kinds
            .iter()
            .flat_map(|k| std::iter::repeat_n(self.length_scale.powi(-k.length_power()), k.rows()))
            .collect()
    }

    /// Translates barycenter targets by `c`.
    pub fn translated(&self, c: &Vector3<f64>) -> Self {
        let mut out = self.clone();
        let mut r = 0;
        for k in &self.kinds {
            if *k == ConstraintKind::Barycenter {
                for a in 0..3 {
                    out.targets[r + a] += c[a];
                }
            }
            r += k.rows();
        }
        out
    }

    pub fn evaluate(&self, mesh: &TriMesh, dofs: &DofMap) -> ConstraintEval {
        let n = 3 * mesh.n_vertices();
        let k = self.n_rows();
        let mut values = Vec::with_capacity(k);
        let mut jacobian = DMatrix::zeros(k, n);
        let tri = triangles(mesh);
        let mut r = 0;
        for kind in &self.kinds {
            values.extend(kind.value(mesh));
            match kind {
                ConstraintKind::Barycenter => barycenter_rows(mesh, &tri, &mut jacobian, r),
                ConstraintKind::Area => area_row(mesh, &tri, &mut jacobian, r),
                ConstraintKind::Volume => volume_row(mesh, &mut jacobian, r),
            }
            r += kind.rows();
        }
        zero_fixed_columns(&mut jacobian, dofs);
        let values = DVector::from_vec(values);
        let residual = &values - DVector::from_column_slice(&self.targets);
        ConstraintEval {
            values,
            residual,
            jacobian,
            row_scales: DVector::from_vec(self.row_scales()),
        }
    }

    /// Unscaled residual `Φ(f) - y₀` and the dimensionless violation, without
    /// the Jacobian.
    pub fn residual(&self, mesh: &TriMesh) -> (DVector<f64>, f64) {
        let values: Vec<f64> = self.kinds.iter().flat_map(|k| k.value(mesh)).collect();
        let r = DVector::from_vec(values) - DVector::from_column_slice(&self.targets);
        let v = r
            .iter()
            .zip(self.row_scales())
            .fold(0.0f64, |m, (x, s)| m.max((x * s).abs()));
        (r, v)
    }

    /// Rows of `d/dt A(f + t u)` at `t = 0` over all 3N DOFs.
    pub fn jacobian_directional_derivative(
        &self,
        mesh: &TriMesh,
        dofs: &DofMap,
        u: &DVector<f64>,
    ) -> Result<DMatrix<f64>, ConstraintError> {
        let n = 3 * mesh.n_vertices();
        if u.len() != n {
            return Err(ConstraintError::Dimension { expected: n, got: u.len() });
        }
        let mut out = DMatrix::zeros(self.n_rows(), n);
        let tri = triangles(mesh);
        let mut r = 0;
        for kind in &self.kinds {
            match kind {
                ConstraintKind::Barycenter => barycenter_rows_derivative(mesh, &tri, u, &mut out, r),
                ConstraintKind::Area => area_row_derivative(mesh, &tri, u, &mut out, r),
                ConstraintKind::Volume => volume_row_derivative(mesh, u, &mut out, r),
            }
            r += kind.rows();
        }
        zero_fixed_columns(&mut out, dofs);
        Ok(out)
    }
}

/// Constraint values and Jacobian at one configuration.
#[derive(Clone, Debug)]
pub struct ConstraintEval {
    /// `Φ(f)` before subtracting targets.
    pub values: DVector<f64>,
    /// `Φ(f) - y₀`.
    pub residual: DVector<f64>,
    /// `K x 3N`; columns of fixed DOFs are zero.
    pub jacobian: DMatrix<f64>,
    row_scales: DVector<f64>,
}

impl ConstraintEval {
    pub fn n_rows(&self) -> usize {
        self.residual.len()
    }

    pub fn scaled_residual(&self) -> DVector<f64> {
        self.residual.component_mul(&self.row_scales)
    }

    /// `‖Φ(f) - y₀‖∞` after dimensionless scaling.
    pub fn violation(&self) -> f64 {
        self.scaled_residual().amax()
    }

    pub fn row_scales(&self) -> &DVector<f64> {
        &self.row_scales
    }

    /// Jacobian restricted to interior DOF columns.
    pub fn interior_jacobian(&self, dofs: &DofMap) -> DMatrix<f64> {
        restrict_columns(&self.jacobian, dofs)
    }
}

/// Restricts the columns of a `K x 3N` matrix to the interior DOFs.
pub fn restrict_columns(a: &DMatrix<f64>, dofs: &DofMap) -> DMatrix<f64> {
    let verts = dofs.interior_vertices();
    DMatrix::from_fn(a.nrows(), 3 * verts.len(), |r, c| a[(r, 3 * verts[c / 3] + c % 3)])
}

pub fn surface_area_value(mesh: &TriMesh) -> f64 {
    mesh.faces()
        .iter()
        .map(|f| LocalTriangle::new(mesh.face_positions(f)).area)
        .sum()
}

/// Signed enclosed volume `1/6 Σ p₀·(p₁×p₂)`; positive for outward faces.
pub fn enclosed_volume_value(mesh: &TriMesh) -> f64 {
    mesh.faces()
        .iter()
        .map(|f| {
            let [a, b, c] = mesh.face_positions(f);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

/// Area-weighted barycenter `Σ A_T c_T / Σ A_T`.
pub fn barycenter_value(mesh: &TriMesh) -> Vector3<f64> {
    let mut s = 0.0;
    let mut m = Vector3::zeros();
    for f in mesh.faces() {
        let p = mesh.face_positions(f);
        let a = LocalTriangle::new(p).area;
        s += a;
        m += a * (p[0] + p[1] + p[2]) / 3.0;
    }
    m / s
}

fn triangles(mesh: &TriMesh) -> Vec<LocalTriangle> {
    mesh.faces()
        .iter()
        .map(|f| LocalTriangle::new(mesh.face_positions(f)))
        .collect()
}

fn get3(x: &DVector<f64>, i: usize) -> V3 {
    V3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])
}

fn add_row3(a: &mut DMatrix<f64>, row: usize, vertex: usize, v: &V3) {
    for k in 0..3 {
        a[(row, 3 * vertex + k)] += v[k];
    }
}

fn zero_fixed_columns(a: &mut DMatrix<f64>, dofs: &DofMap) {
    for v in 0..dofs.n_vertices() {
        if !dofs.is_interior_vertex(v) {
            a.columns_mut(3 * v, 3).fill(0.0);
        }
    }
}

fn area_row(mesh: &TriMesh, tri: &[LocalTriangle], a: &mut DMatrix<f64>, r: usize) {
    for (t, f) in tri.iter().zip(mesh.faces()) {
        for (m, g) in t.area_gradient().iter().enumerate() {
            add_row3(a, r, f[m], g);
        }
    }
}

fn area_row_derivative(mesh: &TriMesh, tri: &[LocalTriangle], u: &DVector<f64>, a: &mut DMatrix<f64>, r: usize) {
    for (t, f) in tri.iter().zip(mesh.faces()) {
        let du = f.map(|v| get3(u, v));
        for (m, g) in t.area_hessian_apply(&du).iter().enumerate() {
            add_row3(a, r, f[m], g);
        }
    }
}

fn volume_row(mesh: &TriMesh, a: &mut DMatrix<f64>, r: usize) {
    for f in mesh.faces() {
        let p = mesh.face_positions(f);
        for m in 0..3 {
            let g = p[(m + 1) % 3].cross(&p[(m + 2) % 3]) / 6.0;
            add_row3(a, r, f[m], &g);
        }
    }
}

fn volume_row_derivative(mesh: &TriMesh, u: &DVector<f64>, a: &mut DMatrix<f64>, r: usize) {
    for f in mesh.faces() {
        let p = mesh.face_positions(f);
        let du = f.map(|v| get3(u, v));
        for (m, &v) in f.iter().enumerate() {
            let (i, j) = ((m + 1) % 3, (m + 2) % 3);
            let g = (du[i].cross(&p[j]) + p[i].cross(&du[j])) / 6.0;
            add_row3(a, r, v, &g);
        }
    }
}

/// Rows `(1/S) [Σ_T (c_T,a - Ψ_a) ∇A_T + A_T/3 e_a]`.
fn barycenter_rows(mesh: &TriMesh, tri: &[LocalTriangle], a: &mut DMatrix<f64>, r: usize) {
    let psi = barycenter_value(mesh);
    let s: f64 = tri.iter().map(|t| t.area).sum();
    for (t, f) in tri.iter().zip(mesh.faces()) {
        let p = mesh.face_positions(f);
        let c = (p[0] + p[1] + p[2]) / 3.0;
        let ga = t.area_gradient();
        for axis in 0..3 {
            let w = (c[axis] - psi[axis]) / s;
            for m in 0..3 {
                add_row3(a, r + axis, f[m], &(w * ga[m]));
                a[(r + axis, 3 * f[m] + axis)] += t.area / (3.0 * s);
            }
        }
    }
}

fn barycenter_rows_derivative(
    mesh: &TriMesh,
    tri: &[LocalTriangle],
    u: &DVector<f64>,
    a: &mut DMatrix<f64>,
    r: usize,
) {
    let n = 3 * mesh.n_vertices();
    let mut rows = DMatrix::zeros(3, n);
    barycenter_rows(mesh, tri, &mut rows, 0);
    let psi = barycenter_value(mesh);
    let s: f64 = tri.iter().map(|t| t.area).sum();
    let dpsi = &rows * u;
    let mut ds = 0.0;
    // G = S * rows; accumulate dG, then d(G/S) = dG/S - rows dS/S
    let mut dg = DMatrix::zeros(3, n);
    for (t, f) in tri.iter().zip(mesh.faces()) {
        let p = mesh.face_positions(f);
        let du = f.map(|v| get3(u, v));
        let c = (p[0] + p[1] + p[2]) / 3.0;
        let dc = (du[0] + du[1] + du[2]) / 3.0;
        let ga = t.area_gradient();
        let ha = t.area_hessian_apply(&du);
        let da = t.area_directional(&du);
        ds += da;
        for axis in 0..3 {
            let w = c[axis] - psi[axis];
            let dw = dc[axis] - dpsi[axis];
            for m in 0..3 {
                add_row3(&mut dg, axis, f[m], &(dw * ga[m] + w * ha[m]));
                dg[(axis, 3 * f[m] + axis)] += da / 3.0;
            }
        }
    }
    let d = dg / s - rows * (ds / s);
    let mut view = a.rows_mut(r, 3);
    view += d;
}
