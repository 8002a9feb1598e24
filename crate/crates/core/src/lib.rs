//! Discrete Willmore energy minimization by projected H²-gradient descent
//! under equality constraints.
//!
//! The crate is organized bottom-up:
//!
//! * [`mesh`]: triangle meshes, validation, OBJ/PLY I/O, Loop subdivision.
//! * [`fem`]: P1 mass, stiffness and H² operators, the discrete Willmore
//!   energy and its first and second derivatives.
//! * [`constraints`]: barycenter, area and volume constraints.
//! * [`saddle`]: factorization and solution of the bordered systems.
//! * [`descent`]: the descent loop with circular search paths.
//! * [`shapes`]: mesh generators for tests and experiment presets.

pub mod constraints;
pub mod descent;
pub mod fem;
pub mod mesh;
pub mod saddle;
pub mod shapes;
pub mod sparse;

#[cfg(test)]
mod test_support;
