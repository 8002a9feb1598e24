use nalgebra::DVector;

use super::TriMesh;

/// Degree-of-freedom numbering over the interleaved P1 basis.
///
/// Global DOF `3 i + k` is axis `k` of vertex `i`. When a Dirichlet condition
/// is active every axis of every boundary vertex is fixed; the remaining
/// ("interior") DOFs are renumbered compactly as `3 j + k`, where `j` is the
/// rank of the vertex among interior vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    n_vertices: usize,
    interior_rank: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
    dirichlet: bool,
}

impl DofMap {
    /// All DOFs free.
    pub fn free(mesh: &TriMesh) -> Self {
        Self::build(mesh.n_vertices(), |_| true, false)
    }

    /// Boundary vertices fixed.
    pub fn dirichlet(mesh: &TriMesh) -> Self {
        let boundary = mesh.boundary_vertex();
        Self::build(mesh.n_vertices(), |i| !boundary[i], true)
    }

    pub fn new(mesh: &TriMesh, dirichlet: bool) -> Self {
        if dirichlet {
            Self::dirichlet(mesh)
        } else {
            Self::free(mesh)
        }
    }

    fn build(n_vertices: usize, is_interior: impl Fn(usize) -> bool, dirichlet: bool) -> Self {
        let mut interior_rank = vec![None; n_vertices];
        let mut interior_vertices = Vec::new();
        for (i, rank) in interior_rank.iter_mut().enumerate() {
            if is_interior(i) {
                *rank = Some(interior_vertices.len());
                interior_vertices.push(i);
            }
        }
        Self {
            n_vertices,
            interior_rank,
            interior_vertices,
            dirichlet,
        }
    }

    #[inline]
    pub fn dof(vertex: usize, axis: usize) -> usize {
        3 * vertex + axis
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.n_vertices
    }

    pub fn n_interior(&self) -> usize {
        3 * self.interior_vertices.len()
    }

    pub fn n_interior_vertices(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn dirichlet_active(&self) -> bool {
        self.dirichlet
    }

    pub fn is_interior_vertex(&self, vertex: usize) -> bool {
        self.interior_rank[vertex].is_some()
    }

    pub fn interior_rank(&self, vertex: usize) -> Option<usize> {
        self.interior_rank[vertex]
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    /// Restricts a global 3N vector to the interior DOFs.
    pub fn gather(&self, global: &DVector<f64>) -> DVector<f64> {
        assert_eq!(global.len(), self.n_dofs());
        let mut out = DVector::zeros(self.n_interior());
        for (j, &v) in self.interior_vertices.iter().enumerate() {
            for k in 0..3 {
                out[3 * j + k] = global[3 * v + k];
            }
        }
        out
    }

    /// Zero-extends an interior vector to all 3N DOFs.
    pub fn scatter(&self, interior: &DVector<f64>) -> DVector<f64> {
        assert_eq!(interior.len(), self.n_interior());
        let mut out = DVector::zeros(self.n_dofs());
        for (j, &v) in self.interior_vertices.iter().enumerate() {
            for k in 0..3 {
                out[3 * v + k] = interior[3 * j + k];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn interleaved_indexing_is_bijective() {
        let m = shapes::grid_patch(3, 3, 1.0);
        let d = DofMap::free(&m);
        let mut seen = vec![false; d.n_dofs()];
        for i in 0..m.n_vertices() {
            for k in 0..3 {
                let g = DofMap::dof(i, k);
                assert!(!seen[g]);
                seen[g] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
        assert_eq!(d.n_interior(), d.n_dofs());
    }

    #[test]
    fn dirichlet_fixes_boundary_vertices() {
        let m = shapes::grid_patch(3, 3, 1.0);
        let d = DofMap::dirichlet(&m);
        // 4x4 vertex grid, 2x2 interior.
        assert_eq!(d.n_interior_vertices(), 4);
        let f = m.coords();
        let g = d.gather(&f);
        let back = d.scatter(&g);
        for i in 0..m.n_vertices() {
            for k in 0..3 {
                let expect = if m.boundary_vertex()[i] { 0.0 } else { f[3 * i + k] };
                assert_eq!(back[3 * i + k], expect);
            }
        }
    }

    #[test]
    fn single_triangle_dirichlet_has_no_interior() {
        let m = TriMesh::new(
            vec![
                nalgebra::Vector3::zeros(),
                nalgebra::Vector3::x(),
                nalgebra::Vector3::y(),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(DofMap::dirichlet(&m).n_interior(), 0);
        assert_eq!(DofMap::free(&m).n_interior(), 9);
    }
}
