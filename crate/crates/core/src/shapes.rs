//! Mesh generators for tests, examples and the bundled experiment presets.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::constraints::{enclosed_volume_value, surface_area_value};
use crate::mesh::TriMesh;

fn build(positions: Vec<Vector3<f64>>, faces: Vec<[usize; 3]>) -> TriMesh {
    TriMesh::new(positions, faces).expect("generated mesh is valid")
}

/// Flips every face if the (closed) mesh encloses negative volume.
fn orient_outward(mesh: TriMesh) -> TriMesh {
    if enclosed_volume_value(&mesh) < 0.0 {
        mesh.flipped().expect("flipping preserves validity")
    } else {
        mesh
    }
}

/// Regular icosahedron inscribed in the unit sphere, outward oriented.
pub fn icosahedron() -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let positions = raw
        .iter()
        .map(|p| Vector3::new(p[0], p[1], p[2]).normalize())
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    orient_outward(build(positions, faces))
}

/// Splits every triangle into four at edge midpoints (no smoothing).
pub fn midpoint_subdivide(mesh: &TriMesh) -> TriMesh {
    let mut positions = mesh.positions().to_vec();
    let mut mids: HashMap<[usize; 2], usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, positions: &mut Vec<Vector3<f64>>| -> usize {
        *mids.entry([a.min(b), a.max(b)]).or_insert_with(|| {
            positions.push((positions[a] + positions[b]) * 0.5);
            positions.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(4 * mesh.n_faces());
    for &[a, b, c] in mesh.faces() {
        let ab = mid(a, b, &mut positions);
        let bc = mid(b, c, &mut positions);
        let ca = mid(c, a, &mut positions);
        faces.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    build(positions, faces)
}

/// Unit-radius icosphere: the icosahedron refined `level` times by midpoint
/// subdivision with all vertices projected to the sphere. Level `k` has
/// `20 * 4^k` faces.
pub fn icosphere(level: usize) -> TriMesh {
    let mut m = icosahedron();
    for _ in 0..level {
        m = midpoint_subdivide(&m);
        m = m.map_positions(|p| p.normalize()).expect("projection keeps triangles valid");
    }
    m
}

/// Axis-aligned ellipsoid with semi-axes `(a, b, c)` from an icosphere.
pub fn ellipsoid(level: usize, a: f64, b: f64, c: f64) -> TriMesh {
    icosphere(level)
        .map_positions(|p| Vector3::new(a * p.x, b * p.y, c * p.z))
        .expect("scaling keeps triangles valid")
}

/// Unit cube `[0,1]^3` as 12 outward-oriented triangles.
pub fn unit_cube() -> TriMesh {
    let positions = (0..8)
        .map(|i| Vector3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    orient_outward(build(positions, faces))
}

/// Planar `nx x ny` grid on `[0, size] x [0, size * ny / nx]` in the plane
/// `z = 0`, normals along `+z`. Diagonals alternate to avoid a preferred
/// direction.
pub fn grid_patch(nx: usize, ny: usize, size: f64) -> TriMesh {
    let h = size / nx as f64;
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            positions.push(Vector3::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    build(positions, faces)
}

/// Open tube of the given radius and height around the z-axis with
/// `n_around` vertices per ring and `n_height` layers. Alternate rings are
/// rotated by half a step so that triangles are close to isosceles. Normals
/// point away from the axis. The two boundary rings sit at `z = 0` and
/// `z = height`.
pub fn cylinder(radius: f64, height: f64, n_around: usize, n_height: usize) -> TriMesh {
    let mut positions = Vec::with_capacity(n_around * (n_height + 1));
    for j in 0..=n_height {
        let z = height * j as f64 / n_height as f64;
        let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..n_around {
            let t = 2.0 * PI * (i as f64 + shift) / n_around as f64;
            positions.push(Vector3::new(radius * t.cos(), radius * t.sin(), z));
        }
    }
    let idx = |i: usize, j: usize| j * n_around + (i % n_around);
    let mut faces = Vec::with_capacity(2 * n_around * n_height);
    for j in 0..n_height {
        for i in 0..n_around {
            if j % 2 == 0 {
                // lower ring is the unshifted one
                faces.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                faces.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            } else {
                faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
    }
    build(positions, faces)
}

/// Cylinder whose resolution is chosen from the aspect ratio so that
/// triangles are roughly equilateral with `n_around` vertices per ring.
pub fn cylinder_auto(radius: f64, height: f64, n_around: usize) -> TriMesh {
    let edge = 2.0 * PI * radius / n_around as f64;
    let row = edge * 3f64.sqrt() / 2.0;
    let n_height = ((height / row).round() as usize).max(1);
    cylinder(radius, height, n_around, n_height)
}

/// Torus with major radius `major` and tube radius `minor`.
pub fn torus(major: f64, minor: f64, n_major: usize, n_minor: usize) -> TriMesh {
    torus_with(n_major, n_minor, |u, v| {
        let r = major + minor * v.cos();
        Vector3::new(r * u.cos(), r * u.sin(), minor * v.sin())
    })
}

fn torus_with(n_major: usize, n_minor: usize, param: impl Fn(f64, f64) -> Vector3<f64>) -> TriMesh {
    let mut positions = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            let u = 2.0 * PI * i as f64 / n_major as f64;
            let v = 2.0 * PI * j as f64 / n_minor as f64;
            positions.push(param(u, v));
        }
    }
    let idx = |i: usize, j: usize| (i % n_major) * n_minor + (j % n_minor);
    let mut faces = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    orient_outward(build(positions, faces))
}

/// Genus-one test body with a tube of varying thickness and a squashed,
/// slightly twisted cross-section; far from any Willmore minimizer.
pub fn handlebody(n_major: usize, n_minor: usize) -> TriMesh {
    torus_with(n_major, n_minor, |u, v| {
        let minor = 0.55 + 0.25 * (2.0 * u).cos();
        let r = 1.6 + minor * v.cos();
        let z = 0.8 * minor * (v + 0.3 * u.sin()).sin();
        Vector3::new(r * u.cos(), 1.2 * r * u.sin(), z)
    })
}

/// Reduced volume `6 sqrt(pi) V / A^(3/2)`; equals 1 for a round sphere.
pub fn reduced_volume(area: f64, volume: f64) -> f64 {
    6.0 * PI.sqrt() * volume / area.powf(1.5)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scales `family(s)` for the shape parameter `s` in `[lo, hi]` such that the
/// result has exactly the requested area and (up to the bisection accuracy)
/// the requested volume.
fn fit_area_volume(
    family: impl Fn(f64) -> TriMesh,
    lo: f64,
    hi: f64,
    area: f64,
    volume: f64,
) -> TriMesh {
    let target = reduced_volume(area, volume);
    let s = bisect(lo, hi, |s| {
        let m = family(s);
        reduced_volume(surface_area_value(&m), enclosed_volume_value(&m)) - target
    });
    let m = family(s);
    let scale = (area / surface_area_value(&m)).sqrt();
    m.map_positions(|p| p * scale).expect("scaling keeps triangles valid")
}

/// Prolate spheroid (semi-axes `1, 1, c` with `c > 1`, scaled) with the
/// given area and enclosed volume.
pub fn prolate_seed(level: usize, area: f64, volume: f64) -> TriMesh {
    let base = icosphere(level);
    fit_area_volume(
        |c| base.map_positions(|p| Vector3::new(p.x, p.y, c * p.z)).unwrap(),
        1.0,
        20.0,
        area,
        volume,
    )
}

/// Evans-Fung red-blood-cell profile mapped from an icosphere, with the
/// thickness factor fitted to the given area and enclosed volume.
pub fn biconcave_seed(level: usize, area: f64, volume: f64) -> TriMesh {
    let base = icosphere(level);
    let profile = |s2: f64| 0.207161 + 2.002558 * s2 - 1.122762 * s2 * s2;
    fit_area_volume(
        |h| {
            base.map_positions(|p| {
                let s2 = (p.x * p.x + p.y * p.y).min(1.0);
                Vector3::new(p.x, p.y, h * p.z * profile(s2))
            })
            .unwrap()
        },
        0.02,
        3.0,
        area,
        volume,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_radius() {
        for level in 0..4 {
            let m = icosphere(level);
            assert_eq!(m.n_faces(), 20 * 4usize.pow(level as u32));
            assert_eq!(m.euler_characteristic(), 2);
            assert!(m.positions().iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
            assert!(enclosed_volume_value(&m) > 0.0);
        }
    }

    #[test]
    fn cube_volume_and_area() {
        let c = unit_cube();
        assert!(c.is_closed());
        assert!((enclosed_volume_value(&c) - 1.0).abs() < 1e-15);
        assert!((surface_area_value(&c) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn cylinder_has_two_boundary_rings() {
        let c = cylinder(2.5, 2.5, 24, 6);
        let nb = c.boundary_vertex().iter().filter(|&&b| b).count();
        assert_eq!(nb, 48);
        assert_eq!(c.euler_characteristic(), 0);
        // outward normals: first face normal points away from the axis
        let [a, b, d] = c.face_positions(&c.faces()[0]);
        let n = (b - a).cross(&(d - a));
        let centroid = (a + b + d) / 3.0;
        assert!(n.x * centroid.x + n.y * centroid.y > 0.0);
    }

    #[test]
    fn torus_is_genus_one() {
        let t = torus(2.0, 0.5, 16, 8);
        assert!(t.is_closed());
        assert_eq!(t.euler_characteristic(), 0);
        let h = handlebody(16, 8);
        assert_eq!(h.euler_characteristic(), 0);
        assert!(enclosed_volume_value(&h) > 0.0);
    }

    #[test]
    fn canham_seeds_hit_targets() {
        for m in [prolate_seed(2, 7.24, 1.0), biconcave_seed(2, 7.24, 1.0)] {
            assert!((surface_area_value(&m) - 7.24).abs() < 1e-12);
            assert!((enclosed_volume_value(&m) - 1.0).abs() < 1e-9);
        }
    }
}
