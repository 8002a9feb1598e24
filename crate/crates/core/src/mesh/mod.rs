//! Triangle meshes: connectivity, validation, per-face geometry, file I/O and
//! Loop subdivision.
//!
//! A [`TriMesh`] is a discrete immersion: immutable connectivity shared
//! through an [`Arc`] plus one position per vertex. Moving vertices creates a
//! new mesh over the same [`Topology`], so sparsity patterns built from the
//! topology stay valid for the whole optimization run.

mod dofs;
mod geometry;
pub mod io;
mod subdivision;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DVector, Vector3};
use thiserror::Error;

pub use dofs::DofMap;
pub use geometry::{triangle_geometry, TriangleGeometry};
pub use subdivision::loop_subdivide;

/// Relative area threshold below which a triangle counts as degenerate.
/// The absolute threshold is this value times the squared bounding-box diagonal.
pub const DEGENERATE_AREA_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("face at line {line} has {count} vertices; only triangles are supported")]
    NonTriangleFace { line: usize, count: usize },
    #[error("unsupported mesh format `{0}`")]
    UnsupportedFormat(String),
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references vertex {index} but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("face {face} repeats vertex {vertex}")]
    RepeatedVertex { face: usize, vertex: usize },
    #[error("edge ({0}, {1}) is shared by more than two faces")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed in the same direction by two faces")]
    InconsistentOrientation(usize, usize),
    #[error("face {face} is degenerate (area {area:e} below tolerance {tol:e})")]
    DegenerateTriangle { face: usize, area: f64, tol: f64 },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateLength { expected: usize, got: usize },
}

/// Undirected edge with its (one or two) incident faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub faces: [usize; 2],
    pub n_faces: u8,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.n_faces == 1
    }
}

/// Connectivity of a validated, consistently oriented triangle mesh.
#[derive(Debug)]
pub struct Topology {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    edge_index: HashMap<[usize; 2], usize>,
    boundary_vertex: Vec<bool>,
    /// Sorted one-ring neighbours per vertex (excluding the vertex itself).
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    fn build(n_vertices: usize, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        for (f, face) in faces.iter().enumerate() {
            for &v in face {
                if v >= n_vertices {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: v,
                        n_vertices,
                    });
                }
            }
            if face[0] == face[1] || face[0] == face[2] {
                return Err(MeshError::RepeatedVertex { face: f, vertex: face[0] });
            }
            if face[1] == face[2] {
                return Err(MeshError::RepeatedVertex { face: f, vertex: face[1] });
            }
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(faces.len() * 2);
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
        for (f, face) in faces.iter().enumerate() {
            for j in 0..3 {
                let a = face[j];
                let b = face[(j + 1) % 3];
                let key = [a.min(b), a.max(b)];
                match edge_index.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.n_faces >= 2 {
                            return Err(MeshError::NonManifoldEdge(key[0], key[1]));
                        }
                        edge.faces[1] = f;
                        edge.n_faces = 2;
                    }
                    None => {
                        edge_index.insert(key, edges.len());
                        edges.push(Edge {
                            vertices: key,
                            faces: [f, usize::MAX],
                            n_faces: 1,
                        });
                    }
                }
                if directed.insert((a, b), f).is_some() {
                    return Err(MeshError::InconsistentOrientation(a, b));
                }
            }
        }
        // Shared edges must be traversed in opposite directions; a repeated
        // directed edge was rejected above, so two faces on one undirected
        // edge are automatically opposite.

        let mut boundary_vertex = vec![false; n_vertices];
        let mut neighbors = vec![Vec::new(); n_vertices];
        for edge in &edges {
            let [a, b] = edge.vertices;
            if edge.is_boundary() {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }

        Ok(Self {
            n_vertices,
            faces,
            edges,
            edge_index,
            boundary_vertex,
            neighbors,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&[a.min(b), a.max(b)]).copied()
    }

    pub fn boundary_vertex(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|e| !e.is_boundary())
    }
}

/// A validated triangle mesh: shared connectivity plus vertex positions.
#[derive(Clone, Debug)]
pub struct TriMesh {
    topology: Arc<Topology>,
    positions: Vec<Vector3<f64>>,
}

impl TriMesh {
    /// Builds and validates a mesh. Rejects out-of-range indices, repeated
    /// vertices, non-manifold edges, inconsistent orientation and degenerate
    /// triangles.
    pub fn new(positions: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let topology = Topology::build(positions.len(), faces)?;
        Self::with_topology(Arc::new(topology), positions)
    }

    fn with_topology(topology: Arc<Topology>, positions: Vec<Vector3<f64>>) -> Result<Self, MeshError> {
        if positions.len() != topology.n_vertices {
            return Err(MeshError::CoordinateLength {
                expected: 3 * topology.n_vertices,
                got: 3 * positions.len(),
            });
        }
        if let Some(i) = positions.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(MeshError::NonFinite(i));
        }
        let mesh = Self { topology, positions };
        mesh.check_degenerate()?;
        Ok(mesh)
    }

    fn check_degenerate(&self) -> Result<(), MeshError> {
        let tol = self.degenerate_area_tol();
        for (f, face) in self.faces().iter().enumerate() {
            let area = self.face_area(face);
            if !(area >= tol) || area == 0.0 {
                return Err(MeshError::DegenerateTriangle { face: f, area, tol });
            }
        }
        Ok(())
    }

    /// New mesh over the same connectivity with different positions.
    pub fn with_positions(&self, positions: Vec<Vector3<f64>>) -> Result<Self, MeshError> {
        Self::with_topology(Arc::clone(&self.topology), positions)
    }

    /// New mesh from an interleaved coordinate vector of length 3N.
    pub fn with_coords(&self, coords: &DVector<f64>) -> Result<Self, MeshError> {
        let n = self.n_vertices();
        if coords.len() != 3 * n {
            return Err(MeshError::CoordinateLength {
                expected: 3 * n,
                got: coords.len(),
            });
        }
        let positions = (0..n)
            .map(|i| Vector3::new(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]))
            .collect();
        self.with_positions(positions)
    }

    /// Interleaved coordinate vector `f` with `f[3i + k] = p_i[k]`.
    pub fn coords(&self) -> DVector<f64> {
        DVector::from_iterator(
            3 * self.n_vertices(),
            self.positions.iter().flat_map(|p| p.iter().copied()),
        )
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn shares_topology(&self, other: &TriMesh) -> bool {
        Arc::ptr_eq(&self.topology, &other.topology)
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.topology.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.topology.n_vertices
    }

    pub fn n_faces(&self) -> usize {
        self.topology.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.topology.edges.len()
    }

    pub fn boundary_vertex(&self) -> &[bool] {
        &self.topology.boundary_vertex
    }

    pub fn is_closed(&self) -> bool {
        self.topology.is_closed()
    }

    pub fn face_positions(&self, face: &[usize; 3]) -> [Vector3<f64>; 3] {
        [
            self.positions[face[0]],
            self.positions[face[1]],
            self.positions[face[2]],
        ]
    }

    fn face_area(&self, face: &[usize; 3]) -> f64 {
        let [a, b, c] = self.face_positions(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn degenerate_area_tol(&self) -> f64 {
        let d = self.bounding_box_diagonal();
        DEGENERATE_AREA_REL_TOL * d * d
    }

    /// Euler characteristic V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    /// Same connectivity with every face reversed.
    pub fn flipped(&self) -> Result<Self, MeshError> {
        let faces = self.faces().iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self::new(self.positions.clone(), faces)
    }

    /// Applies `map` to every vertex position.
    pub fn map_positions(&self, map: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> Result<Self, MeshError> {
        self.with_positions(self.positions.iter().map(map).collect())
    }
}
