//! Random fixtures shared by the unit tests.

use nalgebra::{DVector, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::TriMesh;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Moves every vertex by a uniform random offset in `[-amp, amp]³`.
pub fn perturbed(mesh: &TriMesh, amp: f64, seed: u64) -> TriMesh {
    let mut r = rng(seed);
    let d = random_vector(&mut r, 3 * mesh.n_vertices()) * amp;
    mesh.with_coords(&(mesh.coords() + d)).unwrap()
}

pub fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    Rotation3::from_scaled_axis(axis.normalize() * rng.random_range(0.1..3.0))
}

/// Maximum relative error between two vectors, normalized by the larger max-norm.
pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}
