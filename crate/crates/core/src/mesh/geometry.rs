use nalgebra::Vector3;

use super::{MeshError, TriMesh};

/// Constant per-face quantities of the P1 element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    /// Surface gradients of the three barycentric hat functions.
    pub basis_gradients: [Vector3<f64>; 3],
    /// Cotangents of the interior angles, indexed by corner.
    pub cotangents: [f64; 3],
}

impl TriangleGeometry {
    pub fn from_points(p: [Vector3<f64>; 3]) -> Self {
        // e[i] is the edge opposite corner i.
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        let n = e[2].cross(&(-e[1]));
        let double_area = n.norm();
        let unit_normal = n / double_area;
        let basis_gradients = [0, 1, 2].map(|i| unit_normal.cross(&e[i]) / double_area);
        let cotangents = [0, 1, 2].map(|i| -e[(i + 1) % 3].dot(&e[(i + 2) % 3]) / double_area);
        Self {
            area: 0.5 * double_area,
            basis_gradients,
            cotangents,
        }
    }
}

pub fn triangle_geometry(mesh: &TriMesh, face: usize) -> Result<TriangleGeometry, MeshError> {
    let f = mesh.faces()[face];
    let p = mesh.face_positions(&f);
    let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    let tol = mesh.degenerate_area_tol();
    if !(area > tol) {
        return Err(MeshError::DegenerateTriangle { face, area, tol });
    }
    Ok(TriangleGeometry::from_points(p))
}
