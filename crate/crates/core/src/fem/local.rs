//! Closed-form per-triangle kernels and their first and second derivatives.
//!
//! Corner `i` of a triangle is opposite the edge `e[i] = p[i+2] - p[i+1]`
//! (indices mod 3). With this convention the P1 stiffness matrix is
//! `L_jk = <e_j, e_k> / (4A)`, a rational function of the vertex positions
//! whose derivatives only need those of the edge Gram matrix and of the area.

use nalgebra::{Matrix3, Vector3};

pub(crate) type V3 = Vector3<f64>;

#[inline]
fn next(i: usize) -> usize {
    (i + 1) % 3
}

#[inline]
fn prev(i: usize) -> usize {
    (i + 2) % 3
}

/// Edge increments `de[i] = du[i+2] - du[i+1]` for corner displacements `du`.
#[inline]
pub(crate) fn edge_increments(du: &[V3; 3]) -> [V3; 3] {
    [0, 1, 2].map(|i| du[prev(i)] - du[next(i)])
}

#[derive(Clone, Debug)]
pub(crate) struct LocalTriangle {
    pub e: [V3; 3],
    /// Unnormalized normal `(p1 - p0) x (p2 - p0)`; its length is `2A`.
    pub normal: V3,
    pub area: f64,
}

impl LocalTriangle {
    pub fn new(p: [V3; 3]) -> Self {
        let e = edge_increments(&p);
        let normal = e[1].cross(&e[2]);
        let area = 0.5 * normal.norm();
        Self { e, normal, area }
    }

    pub fn unit_normal(&self) -> V3 {
        self.normal / (2.0 * self.area)
    }

    /// Consistent P1 mass matrix `A/12 (1 + delta_jk)`.
    pub fn mass(&self) -> Matrix3<f64> {
        let a = self.area / 12.0;
        Matrix3::new(2.0 * a, a, a, a, 2.0 * a, a, a, a, 2.0 * a)
    }

    /// P1 stiffness `<e_j, e_k> / (4A)`.
    pub fn stiffness(&self) -> Matrix3<f64> {
        let s = 0.25 / self.area;
        Matrix3::from_fn(|j, k| s * self.e[j].dot(&self.e[k]))
    }

    /// `dA / dp_i = 1/2 n x e_i` with `n` the unit normal.
    pub fn area_gradient(&self) -> [V3; 3] {
        let n = self.unit_normal();
        [0, 1, 2].map(|i| 0.5 * n.cross(&self.e[i]))
    }

    pub fn area_directional(&self, du: &[V3; 3]) -> f64 {
        let g = self.area_gradient();
        (0..3).map(|i| g[i].dot(&du[i])).sum()
    }

    /// Hessian of the area applied to the corner displacements `du`.
    pub fn area_hessian_apply(&self, du: &[V3; 3]) -> [V3; 3] {
        let de = edge_increments(du);
        let len = 2.0 * self.area;
        let n = self.normal / len;
        let dn_raw = de[1].cross(&self.e[2]) + self.e[1].cross(&de[2]);
        let dn = (dn_raw - n * n.dot(&dn_raw)) / len;
        [0, 1, 2].map(|i| 0.5 * (dn.cross(&self.e[i]) + n.cross(&de[i])))
    }

    /// Directional derivative of the stiffness matrix along `du`.
    pub fn stiffness_directional(&self, du: &[V3; 3]) -> Matrix3<f64> {
        let de = edge_increments(du);
        let da = self.area_directional(du);
        let s = 0.25 / self.area;
        Matrix3::from_fn(|j, k| {
            let gram = self.e[j].dot(&self.e[k]);
            let dgram = de[j].dot(&self.e[k]) + self.e[j].dot(&de[k]);
            s * (dgram - gram * da / self.area)
        })
    }

    fn gram_contraction(&self, c: &Matrix3<f64>) -> (f64, [V3; 3]) {
        let w: [V3; 3] = [0, 1, 2].map(|k| (0..3).map(|j| c[(j, k)] * self.e[j]).sum());
        let value = (0..3).map(|k| w[k].dot(&self.e[k])).sum();
        // dN/dp_m = 2 (w_{m+1} - w_{m+2})
        let grad = [0, 1, 2].map(|m| 2.0 * (w[next(m)] - w[prev(m)]));
        (value, grad)
    }

    /// Gradient with respect to the corners of `sum_jk c_jk L_jk` for a
    /// symmetric coefficient matrix `c`.
    pub fn stiffness_contraction_gradient(&self, c: &Matrix3<f64>) -> [V3; 3] {
        let (n, dn) = self.gram_contraction(c);
        let da = self.area_gradient();
        let a = self.area;
        [0, 1, 2].map(|m| dn[m] / (4.0 * a) - da[m] * (n / (4.0 * a * a)))
    }

    /// Hessian of `sum_jk c_jk L_jk` (symmetric, constant `c`) applied to `du`.
    pub fn stiffness_contraction_hessian_apply(&self, c: &Matrix3<f64>, du: &[V3; 3]) -> [V3; 3] {
        let (n, grad_n) = self.gram_contraction(c);
        let de = edge_increments(du);
        let dw: [V3; 3] = [0, 1, 2].map(|k| (0..3).map(|j| c[(j, k)] * de[j]).sum());
        let d_grad_n = [0, 1, 2].map(|m| 2.0 * (dw[next(m)] - dw[prev(m)]));
        let dn: f64 = (0..3).map(|m| grad_n[m].dot(&du[m])).sum();
        let grad_a = self.area_gradient();
        let da: f64 = (0..3).map(|m| grad_a[m].dot(&du[m])).sum();
        let d_grad_a = self.area_hessian_apply(du);
        let a = self.area;
        let a2 = a * a;
        [0, 1, 2].map(|m| {
            d_grad_n[m] / (4.0 * a) - grad_n[m] * (da / (4.0 * a2)) - grad_a[m] * (dn / (4.0 * a2))
                - d_grad_a[m] * (n / (4.0 * a2))
                + grad_a[m] * (2.0 * n * da / (4.0 * a2 * a))
        })
    }
}
