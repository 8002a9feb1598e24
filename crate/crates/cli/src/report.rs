//! Run outputs: `history.csv`, `timings.csv` and the summary text.
//!
//! `history.csv` contains no wall-clock data, so identical runs produce
//! identical files. Per-phase times go to `timings.csv`.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Duration;

use serde::Serialize;
use willmore_core::descent::{DescentState, IterationRecord, Termination};

/// Number of leading iterations averaged for the per-iteration time.
pub const TIMED_ITERATIONS: usize = 30;

#[derive(Debug, Serialize)]
struct HistoryRow {
    iter: usize,
    energy: f64,
    grad_norm_j: f64,
    constraint_violation: f64,
    tau: f64,
    tau0: f64,
    backtracks: usize,
    restoration_iters: usize,
}

impl From<&IterationRecord> for HistoryRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iter: r.iter,
            energy: r.energy,
            grad_norm_j: r.grad_norm_j,
            constraint_violation: r.violation,
            tau: r.tau,
            tau0: r.tau0,
            backtracks: r.backtracks,
            restoration_iters: r.restoration_iters,
        }
    }
}

#[derive(Debug, Serialize)]
struct PhaseRow {
    iter: usize,
    assembly_s: f64,
    factorization_s: f64,
    solves_s: f64,
    line_search_s: f64,
    restoration_s: f64,
    total_s: f64,
}

pub fn write_history<W: Write>(out: W, history: &[IterationRecord]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in history {
        w.serialize(HistoryRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings<W: Write>(out: W, history: &[IterationRecord]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in history {
        let t = &r.timings;
        w.serialize(PhaseRow {
            iter: r.iter,
            assembly_s: t.assembly.as_secs_f64(),
            factorization_s: t.factorization.as_secs_f64(),
            solves_s: t.solves.as_secs_f64(),
            line_search_s: t.line_search.as_secs_f64(),
            restoration_s: t.restoration.as_secs_f64(),
            total_s: t.total().as_secs_f64(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Throughput in the layout of a timing table: initialization and mean
/// iteration time, each with faces per second.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub faces: usize,
    pub init_time: f64,
    pub init_speed: f64,
    pub iter_time: f64,
    pub iter_speed: f64,
    /// Iterations entering the mean.
    pub timed_iterations: usize,
}

impl TimingRow {
    pub fn new(faces: usize, init: Duration, history: &[IterationRecord]) -> Self {
        // steps actually taken; the last row only describes the final iterate
        let steps: Vec<f64> = history
            .iter()
            .filter(|r| r.tau > 0.0)
            .take(TIMED_ITERATIONS)
            .map(|r| r.timings.total().as_secs_f64())
            .collect();
        let iter_time = if steps.is_empty() {
            0.0
        } else {
            steps.iter().sum::<f64>() / steps.len() as f64
        };
        let init_time = init.as_secs_f64();
        let speed = |t: f64| if t > 0.0 { faces as f64 / t } else { f64::INFINITY };
        Self {
            faces,
            init_time,
            init_speed: speed(init_time),
            iter_time,
            iter_speed: speed(iter_time),
            timed_iterations: steps.len(),
        }
    }
}

pub fn timing_table(rows: &[(String, TimingRow)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>10} {:>12} {:>14} {:>12} {:>14}",
        "job", "faces", "init (s)", "init (faces/s)", "iter (s)", "iter (faces/s)"
    );
    for (name, r) in rows {
        let _ = writeln!(
            s,
            "{:<12} {:>10} {:>12.4} {:>14.1} {:>12.4} {:>14.1}",
            name, r.faces, r.init_time, r.init_speed, r.iter_time, r.iter_speed
        );
    }
    s
}

/// Outcome of one job.
#[derive(Clone, Debug)]
pub struct JobSummary {
    pub name: String,
    pub vertices: usize,
    pub faces: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub initial_mean_curvature_l2: f64,
    pub final_mean_curvature_l2: f64,
    pub final_violation: f64,
    pub max_violation: f64,
    pub monotone: bool,
    pub symbolic_analyses: usize,
    pub factorizations: usize,
    pub timing: TimingRow,
}

impl JobSummary {
    pub fn new(name: &str, state: &DescentState, initial_h: f64, final_h: f64) -> Self {
        let h = &state.history;
        Self {
            name: name.to_string(),
            vertices: state.mesh.n_vertices(),
            faces: state.mesh.n_faces(),
            iterations: state.iterations,
            termination: state.termination,
            initial_energy: h.first().map_or(state.energy, |r| r.energy),
            final_energy: state.energy,
            initial_mean_curvature_l2: initial_h,
            final_mean_curvature_l2: final_h,
            final_violation: state.violation,
            max_violation: h.iter().map(|r| r.violation).fold(0.0, f64::max),
            monotone: h.windows(2).all(|w| w[1].energy <= w[0].energy),
            symbolic_analyses: state.symbolic_analyses,
            factorizations: state.factorizations,
            timing: TimingRow::new(state.mesh.n_faces(), state.init_time, h),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let term = match self.termination {
            Termination::Converged => "converged".to_string(),
            Termination::MaxIterations => "max_iterations".to_string(),
            Termination::Stalled(r) => format!("stalled ({r:?})"),
        };
        let _ = writeln!(s, "job: {}", self.name);
        let _ = writeln!(s, "vertices: {}", self.vertices);
        let _ = writeln!(s, "faces: {}", self.faces);
        let _ = writeln!(s, "termination: {term}");
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let _ = writeln!(s, "initial energy: {:.10}", self.initial_energy);
        let _ = writeln!(s, "final energy: {:.10}", self.final_energy);
        let _ = writeln!(s, "initial mean curvature L2: {:.6e}", self.initial_mean_curvature_l2);
        let _ = writeln!(s, "final mean curvature L2: {:.6e}", self.final_mean_curvature_l2);
        let _ = writeln!(s, "final constraint violation: {:.3e}", self.final_violation);
        let _ = writeln!(s, "max constraint violation: {:.3e}", self.max_violation);
        let _ = writeln!(s, "monotone energy: {}", self.monotone);
        let _ = writeln!(s, "symbolic analyses: {}", self.symbolic_analyses);
        let _ = writeln!(s, "numeric factorizations: {}", self.factorizations);
        s
    }
}
