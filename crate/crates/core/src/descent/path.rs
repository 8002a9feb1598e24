//! Circular search path with affine speed.
//!
//! Given the velocity `u` and acceleration `u̇` of the gradient trajectory at
//! `f`, split `u̇ = a∥ û + u̇⊥` with `û = u/|u|`. The path runs along the
//! circle of curvature `κ = |u̇⊥| / |u|²` in the plane `f + span(û, n̂)`,
//! `n̂ = u̇⊥/|u̇⊥|`, with arc length `σ(t) = |u| t + a∥ t²/2`, i.e. speed
//! `s(t) = |u| + a∥ t`. This is the circle-plus-affine-speed curve with
//! `Θ(0) = f`, `Θ'(0) = u`, `Θ''(0) = u̇`.

use nalgebra::DVector;

/// `sin(x)/x`, accurate near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[derive(Clone, Debug)]
pub struct SearchPath {
    base: DVector<f64>,
    velocity: DVector<f64>,
    acceleration: DVector<f64>,
    speed: f64,
    tangential: f64,
    unit_tangent: DVector<f64>,
    unit_normal: DVector<f64>,
    curvature: f64,
    tau0: f64,
}

impl SearchPath {
    pub fn new(base: DVector<f64>, velocity: DVector<f64>, acceleration: DVector<f64>, tau_max: f64) -> Self {
        let n = base.len();
        let speed = velocity.norm();
        let (unit_tangent, tangential, unit_normal, curvature) = if speed > 0.0 {
            let t = &velocity / speed;
            let a = acceleration.dot(&t);
            let perp = &acceleration - &t * a;
            let pn = perp.norm();
            // a normal part at roundoff level of the acceleration is no curvature
            if pn > 1e-14 * acceleration.norm() && pn > 0.0 {
                let k = pn / (speed * speed);
                (t, a, perp / pn, k)
            } else {
                (t, a, DVector::zeros(n), 0.0)
            }
        } else {
            (DVector::zeros(n), 0.0, DVector::zeros(n), 0.0)
        };
        let tau0 = if speed > 0.0 && tangential < 0.0 {
            -speed / tangential
        } else {
            tau_max
        };
        Self {
            base,
            velocity,
            acceleration,
            speed,
            tangential,
            unit_tangent,
            unit_normal,
            curvature,
            tau0,
        }
    }

    pub fn base(&self) -> &DVector<f64> {
        &self.base
    }

    pub fn velocity(&self) -> &DVector<f64> {
        &self.velocity
    }

    pub fn acceleration(&self) -> &DVector<f64> {
        &self.acceleration
    }

    /// Time at which the speed `s(t)` vanishes, or `tau_max` if it never does.
    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// `s(t) = |u| + t ⟨u̇, û⟩`.
    pub fn speed_at(&self, t: f64) -> f64 {
        self.speed + self.tangential * t
    }

    /// Circle radius `|u|² / |u̇⊥|`; infinite for straight paths.
    pub fn radius(&self) -> f64 {
        if self.curvature > 0.0 {
            1.0 / self.curvature
        } else {
            f64::INFINITY
        }
    }

    pub fn tangential_acceleration(&self) -> f64 {
        self.tangential
    }

    /// Arc length `σ(t)`.
    pub fn arc_length(&self, t: f64) -> f64 {
        self.speed * t + 0.5 * self.tangential * t * t
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        if self.speed == 0.0 {
            return &self.base + &self.acceleration * (0.5 * t * t);
        }
        let s = self.arc_length(t);
        let k = self.curvature;
        let along = s * sinc(k * s);
        let half = sinc(0.5 * k * s);
        let across = 0.5 * k * s * s * half * half;
        &self.base + &self.unit_tangent * along + &self.unit_normal * across
    }
}
