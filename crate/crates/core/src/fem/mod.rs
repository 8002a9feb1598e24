//! Galerkin operators on P1 surface meshes and the discrete Willmore energy.
//!
//! All matrices here have the form `S ⊗ I_3` on interleaved coordinate
//! vectors, so only the scalar `N x N` matrix `S` is stored:
//!
//! * `M`: consistent mass, `∫ φ_i φ_j`.
//! * `L`: cotangent stiffness, `∫ <dφ_i, dφ_j>`.
//! * `Λ`: inverse lumped mass on interior vertices, zero on fixed ones.
//! * `J = L Λ L`: the discrete H² Riesz operator.
//!
//! The energy is `W = ¼ fᵀ J f` and its first and second derivatives are
//! assembled from the closed-form triangle kernels in [`local`].

pub(crate) mod local;
mod willmore;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::mesh::{DofMap, MeshError, Topology, TriMesh};
use crate::sparse::SymCsr;

pub use willmore::{
    discrete_willmore, energy_gradient_rhs, mean_curvature_vector, DirectionalDerivatives, WillmoreState,
};

use local::LocalTriangle;

#[derive(Debug, Error)]
pub enum FemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("vertex {0} has no incident faces")]
    IsolatedVertex(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Symmetric sparse operator acting as `S ⊗ I_3` on interleaved 3N vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymOperator {
    scalar: SymCsr,
}

impl SparseSymOperator {
    pub fn new(scalar: SymCsr) -> Self {
        Self { scalar }
    }

    pub fn scalar(&self) -> &SymCsr {
        &self.scalar
    }

    pub fn into_scalar(self) -> SymCsr {
        self.scalar
    }

    /// Dimension of the coefficient space (3N).
    pub fn dim(&self) -> usize {
        3 * self.scalar.n()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(x.len());
        self.scalar.mul_vec3(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.scalar.to_dense3()
    }
}

/// Diagonal operator with one value per vertex, repeated over the 3 axes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOperator {
    per_vertex: Vec<f64>,
}

impl DiagonalOperator {
    pub fn per_vertex(&self) -> &[f64] {
        &self.per_vertex
    }

    /// Entry for global DOF `dof`.
    pub fn entry(&self, dof: usize) -> f64 {
        self.per_vertex[dof / 3]
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |i, _| self.per_vertex[i / 3] * x[i])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_fn(3 * self.per_vertex.len(), |i, _| self.per_vertex[i / 3]))
    }
}

/// Sparsity templates derived from connectivity alone.
#[derive(Clone, Debug)]
pub struct Patterns {
    /// Vertex and its one-ring: the pattern of `M` and `L`.
    pub one_ring: SymCsr,
    /// Vertex and its two-ring: the pattern of `J`.
    pub two_ring: SymCsr,
}

impl Patterns {
    pub fn new(topology: &Topology) -> Self {
        let n = topology.n_vertices();
        let rows1: Vec<Vec<usize>> = (0..n).map(|i| topology.neighbors(i).to_vec()).collect();
        let rows2: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r: Vec<usize> = topology.neighbors(i).to_vec();
                for &j in topology.neighbors(i) {
                    r.extend_from_slice(topology.neighbors(j));
                }
                r.sort_unstable();
                r.dedup();
                r
            })
            .collect();
        Self {
            one_ring: SymCsr::from_pattern(&rows1),
            two_ring: SymCsr::from_pattern(&rows2),
        }
    }

    pub fn for_mesh(mesh: &TriMesh) -> Arc<Self> {
        Arc::new(Self::new(mesh.topology()))
    }
}

fn scatter_local(target: &mut SymCsr, face: &[usize; 3], local: &nalgebra::Matrix3<f64>) {
    for j in 0..3 {
        for k in 0..3 {
            target.add(face[j], face[k], local[(j, k)]);
        }
    }
}

/// Accumulates the consistent mass matrix into `target` (which must contain
/// the one-ring pattern). Values are added, not overwritten.
pub(crate) fn add_mass(mesh: &TriMesh, target: &mut SymCsr, scale: f64) {
    for face in mesh.faces() {
        let t = LocalTriangle::new(mesh.face_positions(face));
        scatter_local(target, face, &(t.mass() * scale));
    }
}

pub(crate) fn stiffness_into(mesh: &TriMesh, target: &mut SymCsr) {
    target.values_mut().fill(0.0);
    for face in mesh.faces() {
        let t = LocalTriangle::new(mesh.face_positions(face));
        scatter_local(target, face, &t.stiffness());
    }
}

pub fn assemble_mass(mesh: &TriMesh) -> SparseSymOperator {
    let mut m = Patterns::new(mesh.topology()).one_ring;
    add_mass(mesh, &mut m, 1.0);
    SparseSymOperator::new(m)
}

pub fn assemble_stiffness(mesh: &TriMesh) -> SparseSymOperator {
    let mut l = Patterns::new(mesh.topology()).one_ring;
    stiffness_into(mesh, &mut l);
    SparseSymOperator::new(l)
}

/// Lumped vertex areas `m_i = Σ_{T ∋ i} A_T / 3`.
pub fn lumped_vertex_areas(mesh: &TriMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_vertices()];
    for face in mesh.faces() {
        let a = LocalTriangle::new(mesh.face_positions(face)).area / 3.0;
        for &v in face {
            m[v] += a;
        }
    }
    m
}

pub(crate) fn lumped_inverse_from_areas(areas: &[f64], dofs: &DofMap) -> Result<Vec<f64>, FemError> {
    areas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if !dofs.is_interior_vertex(i) {
                Ok(0.0)
            } else if a > 0.0 {
                Ok(1.0 / a)
            } else {
                Err(FemError::IsolatedVertex(i))
            }
        })
        .collect()
}

pub fn assemble_lumped_inverse(mesh: &TriMesh, dofs: &DofMap) -> Result<DiagonalOperator, FemError> {
    let per_vertex = lumped_inverse_from_areas(&lumped_vertex_areas(mesh), dofs)?;
    Ok(DiagonalOperator { per_vertex })
}

/// `J = L Λ L` accumulated into the two-ring template `target`.
pub(crate) fn h2_operator_into(stiffness: &SymCsr, lumped_inverse: &[f64], target: &mut SymCsr) {
    target.values_mut().fill(0.0);
    for (k, &lam) in lumped_inverse.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        for (i, lki) in stiffness.row(k) {
            let w = lki * lam;
            for (j, lkj) in stiffness.row(k) {
                target.add(i, j, w * lkj);
            }
        }
    }
}

pub fn assemble_j(mesh: &TriMesh, dofs: &DofMap) -> Result<SparseSymOperator, FemError> {
    let patterns = Patterns::new(mesh.topology());
    let mut l = patterns.one_ring.clone();
    stiffness_into(mesh, &mut l);
    let lam = lumped_inverse_from_areas(&lumped_vertex_areas(mesh), dofs)?;
    let mut j = patterns.two_ring;
    h2_operator_into(&l, &lam, &mut j);
    Ok(SparseSymOperator::new(j))
}
