use std::sync::Arc;

use nalgebra::{DVector, Matrix3};

use super::local::{LocalTriangle, V3};
use super::{h2_operator_into, lumped_inverse_from_areas, stiffness_into, FemError, Patterns, SparseSymOperator};
use crate::mesh::{DofMap, TriMesh};
use crate::sparse::SymCsr;

#[inline]
fn get3(x: &[f64], i: usize) -> V3 {
    V3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])
}

#[inline]
fn add3(x: &mut [f64], i: usize, v: &V3) {
    x[3 * i] += v.x;
    x[3 * i + 1] += v.y;
    x[3 * i + 2] += v.z;
}

fn symmetrize(c: Matrix3<f64>) -> Matrix3<f64> {
    (c + c.transpose()) * 0.5
}

/// Every quantity of the discrete Willmore energy at one configuration `f`.
///
/// With `y = L f` (one 3-vector per vertex) and `z = Λ y` the energy is
/// `W = ¼ Σ_i Λ_i |y_i|²` and the discrete mean curvature is `H = ½ z`.
#[derive(Clone, Debug)]
pub struct WillmoreState {
    mesh: TriMesh,
    dofs: DofMap,
    patterns: Arc<Patterns>,
    triangles: Vec<LocalTriangle>,
    stiffness: SymCsr,
    vertex_areas: Vec<f64>,
    lumped_inverse: Vec<f64>,
    laplacian: Vec<f64>,
    curvature: Vec<f64>,
    energy: f64,
}

impl WillmoreState {
    pub fn new(mesh: &TriMesh, dofs: &DofMap, patterns: Arc<Patterns>) -> Result<Self, FemError> {
        if dofs.n_vertices() != mesh.n_vertices() {
            return Err(FemError::Dimension {
                expected: mesh.n_vertices(),
                got: dofs.n_vertices(),
            });
        }
        let triangles: Vec<LocalTriangle> = mesh
            .faces()
            .iter()
            .map(|f| LocalTriangle::new(mesh.face_positions(f)))
            .collect();
        let mut vertex_areas = vec![0.0; mesh.n_vertices()];
        for (t, face) in triangles.iter().zip(mesh.faces()) {
            for &v in face {
                vertex_areas[v] += t.area / 3.0;
            }
        }
        let lumped_inverse = lumped_inverse_from_areas(&vertex_areas, dofs)?;
        let mut stiffness = patterns.one_ring.zeros_like();
        stiffness_into(mesh, &mut stiffness);

        let f = mesh.coords();
        let mut laplacian = vec![0.0; f.len()];
        stiffness.mul_vec3(f.as_slice(), &mut laplacian);
        let curvature: Vec<f64> = laplacian
            .iter()
            .enumerate()
            .map(|(i, y)| lumped_inverse[i / 3] * y)
            .collect();
        let energy = 0.25 * laplacian.iter().zip(&curvature).map(|(y, z)| y * z).sum::<f64>();
        Ok(Self {
            mesh: mesh.clone(),
            dofs: dofs.clone(),
            patterns,
            triangles,
            stiffness,
            vertex_areas,
            lumped_inverse,
            laplacian,
            curvature,
            energy,
        })
    }

    pub fn for_mesh(mesh: &TriMesh, dofs: &DofMap) -> Result<Self, FemError> {
        Self::new(mesh, dofs, Patterns::for_mesh(mesh))
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn patterns(&self) -> &Arc<Patterns> {
        &self.patterns
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn stiffness(&self) -> &SymCsr {
        &self.stiffness
    }

    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    pub fn lumped_inverse(&self) -> &[f64] {
        &self.lumped_inverse
    }

    /// Discrete mean curvature vector `½ Λ L f` (3N, zero on fixed DOFs).
    pub fn mean_curvature(&self) -> DVector<f64> {
        DVector::from_iterator(self.curvature.len(), self.curvature.iter().map(|z| 0.5 * z))
    }

    /// Lumped L² norm `(Σ m_i |H_i|²)^½` over interior vertices; equals `√W`.
    pub fn mean_curvature_l2(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.vertex_areas.len() {
            if self.lumped_inverse[i] != 0.0 {
                s += self.vertex_areas[i] * 0.25 * get3(&self.curvature, i).norm_squared();
            }
        }
        s.sqrt()
    }

    /// `Σ_i m_i |H_i|²`: the energy computed pointwise.
    pub fn pointwise_energy(&self) -> f64 {
        self.mean_curvature_l2().powi(2)
    }

    /// `J = L Λ L` over all vertices (scalar, two-ring pattern).
    pub fn h2_operator(&self) -> SymCsr {
        let mut j = self.patterns.two_ring.zeros_like();
        h2_operator_into(&self.stiffness, &self.lumped_inverse, &mut j);
        j
    }

    /// Full gradient `∇W` over all 3N DOFs.
    pub fn gradient(&self) -> DVector<f64> {
        let n = self.mesh.n_vertices();
        let mut g = vec![0.0; 3 * n];
        // ½ L z
        self.stiffness.mul_vec3(&self.curvature, &mut g);
        g.iter_mut().for_each(|v| *v *= 0.5);
        let x = self.mesh.positions();
        for (t, face) in self.triangles.iter().zip(self.mesh.faces()) {
            let z = face.map(|v| get3(&self.curvature, v));
            let c = symmetrize(Matrix3::from_fn(|j, k| z[j].dot(&x[face[k]])));
            let gl = t.stiffness_contraction_gradient(&c);
            let s: f64 = z.iter().map(|v| v.norm_squared()).sum::<f64>() / 3.0;
            let ga = t.area_gradient();
            for m in 0..3 {
                add3(&mut g, face[m], &(0.5 * gl[m] - 0.25 * s * ga[m]));
            }
        }
        DVector::from_vec(g)
    }

    /// `b = -∇W` with fixed DOFs zeroed.
    pub fn rhs(&self) -> DVector<f64> {
        let mut b = -self.gradient();
        self.zero_fixed(&mut b);
        b
    }

    fn zero_fixed(&self, v: &mut DVector<f64>) {
        for i in 0..self.mesh.n_vertices() {
            if !self.dofs.is_interior_vertex(i) {
                v[3 * i] = 0.0;
                v[3 * i + 1] = 0.0;
                v[3 * i + 2] = 0.0;
            }
        }
    }

    /// Directional derivatives of `L`, `Λ`, `J` and `∇W` along the global
    /// displacement `u` (3N; fixed DOFs should be zero).
    pub fn derivatives(&self, u: &DVector<f64>) -> Result<DirectionalDerivatives, FemError> {
        let n = self.mesh.n_vertices();
        if u.len() != 3 * n {
            return Err(FemError::Dimension {
                expected: 3 * n,
                got: u.len(),
            });
        }
        let u = u.as_slice();
        let x = self.mesh.positions();
        let faces = self.mesh.faces();

        let mut dl = self.stiffness.zeros_like();
        let mut dm = vec![0.0; n];
        for (t, face) in self.triangles.iter().zip(faces) {
            let du = face.map(|v| get3(u, v));
            let local = t.stiffness_directional(&du);
            for j in 0..3 {
                for k in 0..3 {
                    dl.add(face[j], face[k], local[(j, k)]);
                }
            }
            let da = t.area_directional(&du) / 3.0;
            for &v in face {
                dm[v] += da;
            }
        }
        let dlambda: Vec<f64> = (0..n)
            .map(|i| -self.lumped_inverse[i] * self.lumped_inverse[i] * dm[i])
            .collect();

        // dy = dL f + L u, dz = dΛ y + Λ dy
        let f = self.mesh.coords();
        let mut dy = vec![0.0; 3 * n];
        dl.mul_vec3(f.as_slice(), &mut dy);
        let mut lu = vec![0.0; 3 * n];
        self.stiffness.mul_vec3(u, &mut lu);
        for (a, b) in dy.iter_mut().zip(&lu) {
            *a += b;
        }
        let dz: Vec<f64> = (0..3 * n)
            .map(|i| dlambda[i / 3] * self.laplacian[i] + self.lumped_inverse[i / 3] * dy[i])
            .collect();

        // ½ (dL z + L dz)
        let mut dg = vec![0.0; 3 * n];
        let mut tmp = vec![0.0; 3 * n];
        dl.mul_vec3(&self.curvature, &mut dg);
        self.stiffness.mul_vec3(&dz, &mut tmp);
        for (a, b) in dg.iter_mut().zip(&tmp) {
            *a = 0.5 * (*a + b);
        }
        for (t, face) in self.triangles.iter().zip(faces) {
            let z = face.map(|v| get3(&self.curvature, v));
            let dzt = face.map(|v| get3(&dz, v));
            let du = face.map(|v| get3(u, v));
            let c = symmetrize(Matrix3::from_fn(|j, k| z[j].dot(&x[face[k]])));
            let dc = symmetrize(Matrix3::from_fn(|j, k| dzt[j].dot(&x[face[k]]) + z[j].dot(&du[k])));
            let g_dc = t.stiffness_contraction_gradient(&dc);
            let h_c = t.stiffness_contraction_hessian_apply(&c, &du);
            let s: f64 = z.iter().map(|v| v.norm_squared()).sum::<f64>() / 3.0;
            let ds: f64 = (0..3).map(|m| 2.0 * z[m].dot(&dzt[m])).sum::<f64>() / 3.0;
            let ga = t.area_gradient();
            let ha = t.area_hessian_apply(&du);
            for m in 0..3 {
                let v = 0.5 * (g_dc[m] + h_c[m]) - 0.25 * (ds * ga[m] + s * ha[m]);
                add3(&mut dg, face[m], &v);
            }
        }

        Ok(DirectionalDerivatives {
            stiffness: self.stiffness.clone(),
            lumped_inverse: self.lumped_inverse.clone(),
            d_stiffness: dl,
            d_lumped_inverse: dlambda,
            d_gradient: DVector::from_vec(dg),
            interior: (0..n).map(|i| self.dofs.is_interior_vertex(i)).collect(),
        })
    }
}

/// Directional derivatives at `f` along a fixed displacement `u`.
///
/// `DJ(f)u` is applied matrix-free as
/// `v ↦ dL Λ L v + L dΛ L v + L Λ dL v`, where `dL` is assembled from
/// per-triangle derivative matrices (same pattern as `L`); no third-order
/// tensor is formed.
#[derive(Clone, Debug)]
pub struct DirectionalDerivatives {
    stiffness: SymCsr,
    lumped_inverse: Vec<f64>,
    d_stiffness: SymCsr,
    d_lumped_inverse: Vec<f64>,
    d_gradient: DVector<f64>,
    interior: Vec<bool>,
}

impl DirectionalDerivatives {
    /// `D(∇W)(f) u` over all 3N DOFs.
    pub fn d_gradient(&self) -> &DVector<f64> {
        &self.d_gradient
    }

    /// `Db(f) u = -D(∇W)(f) u` with fixed DOFs zeroed.
    pub fn d_rhs(&self) -> DVector<f64> {
        let mut v = -self.d_gradient.clone();
        for (i, &inner) in self.interior.iter().enumerate() {
            if !inner {
                v[3 * i] = 0.0;
                v[3 * i + 1] = 0.0;
                v[3 * i + 2] = 0.0;
            }
        }
        v
    }

    pub fn d_stiffness(&self) -> SparseSymOperator {
        SparseSymOperator::new(self.d_stiffness.clone())
    }

    /// `[DJ(f) u] v` for a global 3N vector `v`.
    pub fn apply_dj(&self, v: &DVector<f64>) -> DVector<f64> {
        let n3 = v.len();
        let mut lv = vec![0.0; n3];
        let mut dlv = vec![0.0; n3];
        self.stiffness.mul_vec3(v.as_slice(), &mut lv);
        self.d_stiffness.mul_vec3(v.as_slice(), &mut dlv);
        let lam_lv: Vec<f64> = (0..n3).map(|i| self.lumped_inverse[i / 3] * lv[i]).collect();
        let inner: Vec<f64> = (0..n3)
            .map(|i| self.d_lumped_inverse[i / 3] * lv[i] + self.lumped_inverse[i / 3] * dlv[i])
            .collect();
        let mut out = vec![0.0; n3];
        let mut tmp = vec![0.0; n3];
        self.d_stiffness.mul_vec3(&lam_lv, &mut out);
        self.stiffness.mul_vec3(&inner, &mut tmp);
        for (a, b) in out.iter_mut().zip(&tmp) {
            *a += b;
        }
        DVector::from_vec(out)
    }
}

/// `W = ¼ fᵀ J f`.
pub fn discrete_willmore(mesh: &TriMesh, dofs: &DofMap) -> Result<f64, FemError> {
    Ok(WillmoreState::for_mesh(mesh, dofs)?.energy())
}

/// `½ Λ L f`, zero on fixed DOFs.
pub fn mean_curvature_vector(mesh: &TriMesh, dofs: &DofMap) -> Result<DVector<f64>, FemError> {
    Ok(WillmoreState::for_mesh(mesh, dofs)?.mean_curvature())
}

/// `b_i = -DW(f) φ_i`, zero on fixed DOFs.
pub fn energy_gradient_rhs(mesh: &TriMesh, dofs: &DofMap) -> Result<DVector<f64>, FemError> {
    Ok(WillmoreState::for_mesh(mesh, dofs)?.rhs())
}
