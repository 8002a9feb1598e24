//! Projected H²-gradient descent for the discrete Willmore energy.
//!
//! One iteration at `f`:
//!
//! 1. assemble `J(f)`, `b(f)`, `Φ(f)`, `A(f)` and factor the saddle matrix;
//! 2. solve `[J Aᵀ; A 0] (u, λ) = (b, 0)` for the projected gradient `u`;
//! 3. differentiate that system along `u` and solve for the acceleration
//!    `u̇` with the same factorization;
//! 4. backtrack from `τ₀` along the circular path `Θ(τ)` until the Armijo
//!    condition holds;
//! 5. restore feasibility with `f ← f - A(f)†Φ(f)`, `A` frozen at the
//!    pre-step iterate (again the same factorization).

mod path;

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use thiserror::Error;

use crate::constraints::{ConstraintError, ConstraintEval, ConstraintSet};
use crate::fem::{add_mass, FemError, Patterns, WillmoreState};
use crate::mesh::{DofMap, MeshError, TriMesh};
use crate::saddle::{SaddleError, SaddleFactorization, SaddleSolver, SaddleSystem, SolverOptions};

pub use path::SearchPath;

#[derive(Debug, Error)]
pub enum DescentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Saddle(#[from] SaddleError),
    #[error("constraint restoration did not reach {tolerance:.1e} within {iterations} iterations (violation {violation:.3e})")]
    Restoration {
        iterations: usize,
        violation: f64,
        tolerance: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlowMode {
    ProjectedDescent,
    /// `(M + τJ) v = τ b` steps of fixed size `τ`.
    SemiImplicit { tau: f64 },
}

#[derive(Clone, Debug)]
pub struct DescentConfig {
    pub max_iters: usize,
    /// Threshold on `¼ uᵀJu`; `None` means `1e-8 (W₀ + 1)`.
    pub grad_tol: Option<f64>,
    /// Bound on the dimensionless constraint residual `‖Φ‖∞`.
    pub constraint_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub tau_max: f64,
    pub max_backtracks: usize,
    pub max_restoration_iters: usize,
    /// Newton iterations allowed to make an infeasible initial mesh feasible.
    pub max_projection_iters: usize,
    /// Consecutive iterations with relative decrease below
    /// `stall_rel_decrease` that count as a stall.
    pub stall_window: usize,
    pub stall_rel_decrease: f64,
    pub flow_mode: FlowMode,
    pub solver: SolverOptions,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            grad_tol: None,
            constraint_tol: 1e-9,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            tau_max: 1.0,
            max_backtracks: 40,
            max_restoration_iters: 10,
            max_projection_iters: 50,
            stall_window: 5,
            stall_rel_decrease: 1e-14,
            flow_mode: FlowMode::ProjectedDescent,
            solver: SolverOptions::default(),
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<(), DescentError> {
        let err = |m: &str| Err(DescentError::Config(m.to_string()));
        if let Some(g) = self.grad_tol {
            if !(g > 0.0) {
                return err("grad_tol must be positive");
            }
        }
        if !(self.constraint_tol > 0.0) {
            return err("constraint_tol must be positive");
        }
        if !(0.0..1.0).contains(&self.armijo_c) {
            return err("armijo_c must lie in [0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return err("backtrack_factor must lie in (0, 1)");
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return err("tau_max must be positive and finite");
        }
        if let FlowMode::SemiImplicit { tau } = self.flow_mode {
            if !(tau > 0.0 && tau.is_finite()) {
                return err("semi-implicit tau must be positive and finite");
            }
        }
        if !(self.solver.solver_tol > 0.0) {
            return err("solver_tol must be positive");
        }
        if self.stall_window == 0 {
            return err("stall_window must be at least 1");
        }
        Ok(())
    }
}

/// Wall-clock time per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub assembly: Duration,
    pub factorization: Duration,
    pub solves: Duration,
    pub line_search: Duration,
    pub restoration: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.assembly + self.factorization + self.solves + self.line_search + self.restoration
    }

    fn accumulate(&mut self, o: &PhaseTimings) {
        self.assembly += o.assembly;
        self.factorization += o.factorization;
        self.solves += o.solves;
        self.line_search += o.line_search;
        self.restoration += o.restoration;
    }
}

/// One history row, describing the iterate `f_iter` and the step taken from
/// it (`tau = 0` when no step was taken).
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    /// `‖u‖_J = (uᵀJu)^½` of the projected gradient at `f_iter`.
    pub grad_norm_j: f64,
    pub violation: f64,
    pub tau: f64,
    pub tau0: f64,
    pub backtracks: usize,
    pub restoration_iters: usize,
    pub timings: PhaseTimings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StallReason {
    /// No admissible step after `max_backtracks` reductions.
    LineSearch,
    /// Relative decrease below threshold for `stall_window` iterations.
    NoProgress,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    Stalled(StallReason),
}

#[derive(Clone, Debug)]
pub struct DescentState {
    pub mesh: TriMesh,
    pub energy: f64,
    /// Projected gradient `u` at `mesh` (3N, zero on fixed DOFs).
    pub gradient: DVector<f64>,
    pub multipliers: DVector<f64>,
    /// Last accepted step size.
    pub tau: f64,
    pub violation: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    pub termination: Termination,
    /// Pattern construction, symbolic analysis and initial projection.
    pub init_time: Duration,
    /// Sum of per-iteration phases.
    pub timings: PhaseTimings,
    pub symbolic_analyses: usize,
    pub factorizations: usize,
}

/// A failed run together with the state reached before the failure.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct DescentFailure {
    #[source]
    pub error: DescentError,
    pub partial: Option<Box<DescentState>>,
}

impl From<DescentError> for DescentFailure {
    fn from(error: DescentError) -> Self {
        Self { error, partial: None }
    }
}

/// Everything assembled at one iterate.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub mesh: TriMesh,
    pub willmore: WillmoreState,
    pub constraints: ConstraintEval,
    pub system: SaddleSystem,
}

impl Assembled {
    pub fn energy(&self) -> f64 {
        self.willmore.energy()
    }
}

/// Projected gradient and multipliers.
#[derive(Clone, Debug)]
pub struct Step {
    /// 3N, zero on fixed DOFs.
    pub u: DVector<f64>,
    pub multipliers: DVector<f64>,
    /// `uᵀJu = bᵀu`.
    pub uju: f64,
}

/// Accepted trial along a path.
#[derive(Clone, Debug)]
pub struct LineSearchResult {
    pub tau: f64,
    pub backtracks: usize,
    pub mesh: TriMesh,
    pub energy: f64,
}

/// Per-run context: DOF partition, sparsity templates, constraint stack and
/// the saddle solver holding the reusable symbolic analysis.
#[derive(Debug)]
pub struct Descent {
    config: DescentConfig,
    constraints: ConstraintSet,
    dofs: DofMap,
    patterns: Arc<Patterns>,
    solver: SaddleSolver,
}

impl Descent {
    pub fn new(mesh: &TriMesh, config: DescentConfig, constraints: ConstraintSet) -> Result<Self, DescentError> {
        config.validate()?;
        let dofs = DofMap::new(mesh, constraints.dirichlet());
        let patterns = Patterns::for_mesh(mesh);
        let solver = SaddleSolver::new(config.solver.clone());
        Ok(Self {
            config,
            constraints,
            dofs,
            patterns,
            solver,
        })
    }

    pub fn config(&self) -> &DescentConfig {
        &self.config
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn solver(&self) -> &SaddleSolver {
        &self.solver
    }

    pub fn energy(&self, mesh: &TriMesh) -> Result<f64, DescentError> {
        Ok(WillmoreState::new(mesh, &self.dofs, self.patterns.clone())?.energy())
    }

    /// Dimensionless constraint violation at `mesh`.
    pub fn violation(&self, mesh: &TriMesh) -> f64 {
        self.constraints.residual(mesh).1
    }

    pub fn assemble(&self, mesh: &TriMesh) -> Result<Assembled, DescentError> {
        let willmore = WillmoreState::new(mesh, &self.dofs, self.patterns.clone())?;
        let constraints = self.constraints.evaluate(mesh, &self.dofs);
        let system = SaddleSystem::from_global(&willmore.h2_operator(), &constraints.jacobian, &self.dofs)?;
        Ok(Assembled {
            mesh: mesh.clone(),
            willmore,
            constraints,
            system,
        })
    }

    pub fn factorize(&mut self, system: &SaddleSystem) -> Result<SaddleFactorization, DescentError> {
        Ok(self.solver.factorize(system)?)
    }

    /// Projected downward H²-gradient: `[J Aᵀ; A 0](u, λ) = (b, 0)`.
    pub fn compute_step(&self, a: &Assembled, fact: &SaddleFactorization) -> Result<Step, DescentError> {
        let b = self.dofs.gather(&a.willmore.rhs());
        let sol = fact.solve_projected_gradient(&b)?;
        let uju = b.dot(&sol.primal);
        Ok(Step {
            u: self.dofs.scatter(&sol.primal),
            multipliers: sol.multipliers,
            uju,
        })
    }

    /// Acceleration of the gradient trajectory and the circular path.
    pub fn compute_path(
        &self,
        a: &Assembled,
        step: &Step,
        fact: &SaddleFactorization,
    ) -> Result<SearchPath, DescentError> {
        let u = &step.u;
        let d = a.willmore.derivatives(u)?;
        let da = self.constraints.jacobian_directional_derivative(&a.mesh, &self.dofs, u)?;
        let rhs = d.d_rhs() - d.apply_dj(u) - da.tr_mul(&step.multipliers);
        let rhs_dual = -(&da * u);
        let sol = fact.solve(&self.dofs.gather(&rhs), &rhs_dual)?;
        Ok(SearchPath::new(
            a.mesh.coords(),
            u.clone(),
            self.dofs.scatter(&sol.primal),
            self.config.tau_max,
        ))
    }

    /// Backtracking from `τ₀` until
    /// `W(Θ(τ)) ≤ W(f) - armijo_c τ uᵀJu`. `None` signals a stall.
    pub fn line_search(&self, base: &TriMesh, path: &SearchPath, energy: f64, uju: f64) -> Option<LineSearchResult> {
        let mut tau = path.tau0();
        for backtracks in 0..=self.config.max_backtracks {
            if let Some((mesh, w)) = self.armijo_trial(base, path, tau, energy, uju) {
                return Some(LineSearchResult {
                    tau,
                    backtracks,
                    mesh,
                    energy: w,
                });
            }
            tau *= self.config.backtrack_factor;
        }
        None
    }

    /// The mesh `Θ(τ)` and its energy if it passes the Armijo test.
    fn armijo_trial(&self, base: &TriMesh, path: &SearchPath, tau: f64, energy: f64, uju: f64) -> Option<(TriMesh, f64)> {
        let mesh = path_mesh(path, tau, base).ok()?;
        let w = self.energy(&mesh).ok().filter(|w| w.is_finite())?;
        (w <= energy - self.config.armijo_c * tau * uju).then_some((mesh, w))
    }

    /// `f ← f - A†Φ(f)` with `A† ` from `fact` (frozen Jacobian), until the
    /// violation is below `constraint_tol`. Returns the mesh and the number
    /// of corrections applied.
    pub fn restore_constraints(
        &self,
        mesh: &TriMesh,
        fact: &SaddleFactorization,
    ) -> Result<(TriMesh, usize), DescentError> {
        let mut m = mesh.clone();
        let mut violation = 0.0;
        for it in 0..=self.config.max_restoration_iters {
            let (residual, v) = self.constraints.residual(&m);
            violation = v;
            if v <= self.config.constraint_tol {
                return Ok((m, it));
            }
            if it == self.config.max_restoration_iters {
                break;
            }
            let corr = fact.apply_pseudoinverse(&residual)?;
            m = m.with_coords(&(m.coords() - self.dofs.scatter(&corr.primal)))?;
        }
        Err(DescentError::Restoration {
            iterations: self.config.max_restoration_iters,
            violation,
            tolerance: self.config.constraint_tol,
        })
    }

    /// Newton projection onto the constraint manifold with the Jacobian
    /// re-evaluated every iteration; used when the initial mesh violates
    /// explicitly prescribed targets.
    pub fn project_initial(&mut self, mesh: &TriMesh) -> Result<(TriMesh, usize), DescentError> {
        let mut m = mesh.clone();
        for it in 0..=self.config.max_projection_iters {
            let (residual, v) = self.constraints.residual(&m);
            if v <= self.config.constraint_tol {
                return Ok((m, it));
            }
            if it == self.config.max_projection_iters {
                return Err(DescentError::Restoration {
                    iterations: it,
                    violation: v,
                    tolerance: self.config.constraint_tol,
                });
            }
            let a = self.assemble(&m)?;
            let fact = self.factorize(&a.system)?;
            let corr = fact.apply_pseudoinverse(&residual)?;
            m = m.with_coords(&(m.coords() - self.dofs.scatter(&corr.primal)))?;
        }
        unreachable!("loop returns on its last iteration")
    }

    /// Bordered system with `M + τJ` in place of `J`.
    pub fn semi_implicit_system(&self, a: &Assembled, tau: f64) -> Result<SaddleSystem, DescentError> {
        let mut primal = a.willmore.h2_operator();
        primal.scale(tau);
        add_mass(&a.mesh, &mut primal, 1.0);
        Ok(SaddleSystem::from_global(&primal, &a.constraints.jacobian, &self.dofs)?)
    }

    /// One step `f + v`, `[(M + τJ) Aᵀ; A 0](v, μ) = (τb, 0)`, followed by
    /// restoration with the same factorization.
    pub fn semi_implicit_step(&mut self, a: &Assembled, tau: f64) -> Result<(TriMesh, usize), DescentError> {
        let (v, fact) = self.semi_implicit_velocity(a, tau)?;
        let trial = a.mesh.with_coords(&(a.mesh.coords() + v))?;
        self.restore_constraints(&trial, &fact)
    }

    /// The increment `v` (3N) of a semi-implicit step and its factorization.
    pub fn semi_implicit_velocity(
        &mut self,
        a: &Assembled,
        tau: f64,
    ) -> Result<(DVector<f64>, SaddleFactorization), DescentError> {
        let sys = self.semi_implicit_system(a, tau)?;
        let fact = self.factorize(&sys)?;
        let b = self.dofs.gather(&a.willmore.rhs()) * tau;
        let sol = fact.solve_projected_gradient(&b)?;
        Ok((self.dofs.scatter(&sol.primal), fact))
    }
}

fn path_mesh(path: &SearchPath, tau: f64, template: &TriMesh) -> Result<TriMesh, MeshError> {
    template.with_coords(&path.eval(tau))
}

/// Runs the descent to termination.
pub fn run(initial: &TriMesh, config: DescentConfig, constraints: ConstraintSet) -> Result<DescentState, DescentFailure> {
    run_with_observer(initial, config, constraints, &mut |_, _| {})
}

/// As [`run`], calling `observer` with every history row and the iterate it
/// describes.
pub fn run_with_observer(
    initial: &TriMesh,
    config: DescentConfig,
    constraints: ConstraintSet,
    observer: &mut dyn FnMut(&IterationRecord, &TriMesh),
) -> Result<DescentState, DescentFailure> {
    let start = Instant::now();
    let mut d = Descent::new(initial, config, constraints)?;
    let (mesh, _) = d.project_initial(initial)?;
    let first = d.assemble(&mesh)?;
    d.solver.analyze(first.system.primal());
    let init_time = start.elapsed();
    let grad_tol = d.config.grad_tol.unwrap_or(1e-8 * (first.energy() + 1.0));

    let mut state = DescentState {
        energy: first.energy(),
        violation: first.constraints.violation(),
        mesh,
        gradient: DVector::zeros(0),
        multipliers: DVector::zeros(0),
        tau: 0.0,
        iterations: 0,
        history: Vec::new(),
        termination: Termination::MaxIterations,
        init_time,
        timings: PhaseTimings::default(),
        symbolic_analyses: 0,
        factorizations: 0,
    };
    let mut next = Some(first);
    let mut slow = 0usize;

    loop {
        let mut t = PhaseTimings::default();
        let outcome = (|| -> Result<Advance, DescentError> {
            let clock = Instant::now();
            let a = match next.take() {
                Some(a) => a,
                None => d.assemble(&state.mesh)?,
            };
            t.assembly = clock.elapsed();

            let clock = Instant::now();
            let fact = d.factorize(&a.system)?;
            t.factorization = clock.elapsed();

            let clock = Instant::now();
            let step = d.compute_step(&a, &fact)?;
            t.solves = clock.elapsed();
            state.gradient = step.u.clone();
            state.multipliers = step.multipliers.clone();
            state.energy = a.energy();
            state.violation = a.constraints.violation();

            if 0.25 * step.uju <= grad_tol {
                return Ok(Advance::Stop(Termination::Converged, step.uju));
            }
            if slow >= d.config.stall_window {
                return Ok(Advance::Stop(Termination::Stalled(StallReason::NoProgress), step.uju));
            }
            if state.iterations >= d.config.max_iters {
                return Ok(Advance::Stop(Termination::MaxIterations, step.uju));
            }
            match d.config.flow_mode {
                FlowMode::ProjectedDescent => {
                    let clock = Instant::now();
                    let path = d.compute_path(&a, &step, &fact)?;
                    t.solves += clock.elapsed();
                    d.advance_along(&a, &path, &step, &fact, &mut t)
                }
                FlowMode::SemiImplicit { tau } => Ok(d.advance_semi_implicit(&a, tau, step.uju, &mut t)?),
            }
        })();

        let advance = match outcome {
            Ok(adv) => adv,
            Err(error) => {
                state.timings.accumulate(&t);
                finish_stats(&mut state, &d);
                return Err(DescentFailure {
                    error,
                    partial: Some(Box::new(state)),
                });
            }
        };
        state.timings.accumulate(&t);
        let mut record = IterationRecord {
            iter: state.iterations,
            energy: state.energy,
            grad_norm_j: 0.0,
            violation: state.violation,
            tau: 0.0,
            tau0: 0.0,
            backtracks: 0,
            restoration_iters: 0,
            timings: t,
        };
        match advance {
            Advance::Stop(term, uju) => {
                record.grad_norm_j = uju.max(0.0).sqrt();
                observer(&record, &state.mesh);
                state.history.push(record);
                state.termination = term;
                break;
            }
            Advance::Stalled { uju, tau0, backtracks } => {
                record.grad_norm_j = uju.max(0.0).sqrt();
                record.tau0 = tau0;
                record.backtracks = backtracks;
                observer(&record, &state.mesh);
                state.history.push(record);
                state.termination = Termination::Stalled(StallReason::LineSearch);
                break;
            }
            Advance::Step(s) => {
                record.grad_norm_j = s.uju.max(0.0).sqrt();
                record.tau = s.tau;
                record.tau0 = s.tau0;
                record.backtracks = s.backtracks;
                record.restoration_iters = s.restoration_iters;
                observer(&record, &state.mesh);
                state.history.push(record);

                let rel = (state.energy - s.energy) / state.energy.abs().max(f64::MIN_POSITIVE);
                slow = if rel < d.config.stall_rel_decrease { slow + 1 } else { 0 };
                state.mesh = s.mesh;
                state.energy = s.energy;
                state.tau = s.tau;
                state.iterations += 1;
            }
        }
    }
    finish_stats(&mut state, &d);
    Ok(state)
}

fn finish_stats(state: &mut DescentState, d: &Descent) {
    state.symbolic_analyses = d.solver.symbolic_analyses();
    state.factorizations = d.solver.factorizations();
}

enum Advance {
    Stop(Termination, f64),
    Stalled { uju: f64, tau0: f64, backtracks: usize },
    Step(Accepted),
}

struct Accepted {
    mesh: TriMesh,
    energy: f64,
    uju: f64,
    tau: f64,
    tau0: f64,
    backtracks: usize,
    restoration_iters: usize,
}

impl Descent {
    /// Line search along `path` with restoration of every Armijo-admissible
    /// trial. A trial is rejected if restoration fails or the restored
    /// energy exceeds `W(f)`; if no trial survives and some restoration
    /// failed, that failure is returned.
    fn advance_along(
        &self,
        a: &Assembled,
        path: &SearchPath,
        step: &Step,
        fact: &SaddleFactorization,
        t: &mut PhaseTimings,
    ) -> Result<Advance, DescentError> {
        let energy = a.energy();
        let mut tau = path.tau0();
        let mut failure = None;
        for backtracks in 0..=self.config.max_backtracks {
            let clock = Instant::now();
            let trial = self.armijo_trial(&a.mesh, path, tau, energy, step.uju);
            t.line_search += clock.elapsed();
            if let Some((mesh, _)) = trial {
                let clock = Instant::now();
                let restored = self
                    .restore_constraints(&mesh, fact)
                    .map_err(|e| failure = Some(e))
                    .ok()
                    .and_then(|(m, it)| self.energy(&m).ok().map(|w| (m, it, w)));
                t.restoration += clock.elapsed();
                if let Some((mesh, iters, w)) = restored {
                    if w.is_finite() && w <= energy {
                        return Ok(Advance::Step(Accepted {
                            mesh,
                            energy: w,
                            uju: step.uju,
                            tau,
                            tau0: path.tau0(),
                            backtracks,
                            restoration_iters: iters,
                        }));
                    }
                }
                log::debug!("trial at tau {tau:e} rejected after restoration");
            }
            tau *= self.config.backtrack_factor;
        }
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Advance::Stalled {
            uju: step.uju,
            tau0: path.tau0(),
            backtracks: self.config.max_backtracks,
        })
    }

    /// Semi-implicit step of size `tau`, halved while the restored energy
    /// exceeds `W(f)`.
    fn advance_semi_implicit(
        &mut self,
        a: &Assembled,
        mut tau: f64,
        uju: f64,
        t: &mut PhaseTimings,
    ) -> Result<Advance, DescentError> {
        let energy = a.energy();
        let tau0 = tau;
        for backtracks in 0..=self.config.max_backtracks {
            let clock = Instant::now();
            let (v, fact) = self.semi_implicit_velocity(a, tau)?;
            t.factorization += clock.elapsed();
            let clock = Instant::now();
            let trial = a.mesh.with_coords(&(a.mesh.coords() + v)).ok();
            t.line_search += clock.elapsed();
            if let Some(trial) = trial {
                let clock = Instant::now();
                let restored = self
                    .restore_constraints(&trial, &fact)
                    .ok()
                    .and_then(|(m, it)| self.energy(&m).ok().map(|w| (m, it, w)));
                t.restoration += clock.elapsed();
                if let Some((mesh, iters, w)) = restored {
                    if w.is_finite() && w <= energy {
                        return Ok(Advance::Step(Accepted {
                            mesh,
                            energy: w,
                            uju,
                            tau,
                            tau0,
                            backtracks,
                            restoration_iters: iters,
                        }));
                    }
                }
            }
            tau *= self.config.backtrack_factor;
        }
        Ok(Advance::Stalled {
            uju,
            tau0,
            backtracks: self.config.max_backtracks,
        })
    }
}

#[cfg(test)]
mod tests;
