use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{MeshError, TriMesh};

fn opposite(face: &[usize; 3], a: usize, b: usize) -> usize {
    *face.iter().find(|&&v| v != a && v != b).expect("edge belongs to face")
}

/// Loop's weight for the one-ring of an interior vertex of valence `n`.
fn loop_beta(n: usize) -> f64 {
    let n = n as f64;
    let c = 3.0 / 8.0 + 0.25 * (2.0 * PI / n).cos();
    (5.0 / 8.0 - c * c) / n
}

/// One step of Loop subdivision.
///
/// New vertices are numbered old vertices first, then one per edge in the
/// topology's edge order. Each face `(a, b, c)` is split into four faces with
/// the parent orientation. Interior edges use the 3/8, 1/8 mask, boundary
/// edges the midpoint; interior vertices use Loop's beta rule and boundary
/// vertices the cubic B-spline mask 3/4, 1/8, 1/8 along the boundary.
pub fn loop_subdivide(mesh: &TriMesh) -> Result<TriMesh, MeshError> {
    let topo = mesh.topology();
    let p = mesh.positions();
    let n_old = mesh.n_vertices();
    let faces = mesh.faces();

    let mut positions = Vec::with_capacity(n_old + mesh.n_edges());

    // boundary neighbours of each boundary vertex
    let mut boundary_nbrs: Vec<Vec<usize>> = vec![Vec::new(); n_old];
    for e in topo.edges().iter().filter(|e| e.is_boundary()) {
        let [a, b] = e.vertices;
        boundary_nbrs[a].push(b);
        boundary_nbrs[b].push(a);
    }

    for v in 0..n_old {
        let nb = topo.neighbors(v);
        let new = if mesh.boundary_vertex()[v] {
            let bn = &boundary_nbrs[v];
            if bn.len() == 2 {
                p[v] * 0.75 + (p[bn[0]] + p[bn[1]]) * 0.125
            } else {
                // non-manifold vertex (bow-tie); keep it in place
                p[v]
            }
        } else if nb.is_empty() {
            p[v]
        } else {
            let beta = loop_beta(nb.len());
            let sum: Vector3<f64> = nb.iter().map(|&j| p[j]).sum();
            p[v] * (1.0 - nb.len() as f64 * beta) + sum * beta
        };
        positions.push(new);
    }

    for e in topo.edges() {
        let [a, b] = e.vertices;
        let new = if e.is_boundary() {
            (p[a] + p[b]) * 0.5
        } else {
            let c = opposite(&faces[e.faces[0]], a, b);
            let d = opposite(&faces[e.faces[1]], a, b);
            (p[a] + p[b]) * 0.375 + (p[c] + p[d]) * 0.125
        };
        positions.push(new);
    }

    let mid = |a: usize, b: usize| n_old + topo.edge_between(a, b).expect("edge exists");
    let mut new_faces = Vec::with_capacity(4 * faces.len());
    for &[a, b, c] in faces {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        new_faces.push([a, ab, ca]);
        new_faces.push([b, bc, ab]);
        new_faces.push([c, ca, bc]);
        new_faces.push([ab, bc, ca]);
    }
    TriMesh::new(positions, new_faces)
}
