//! Run configuration files.
//!
//! A configuration is a TOML document. Unknown keys are rejected. Relative
//! paths are resolved against the directory holding the file.
//!
//! ```toml
//! preset = "canham"          # optional; see `presets`
//! input = "shape.obj"        # mesh file, when no preset supplies one
//! output_dir = "out"
//! frame_interval = 10        # write an OBJ frame every 10 iterations
//! dirichlet = false
//!
//! [[constraints]]
//! kind = "area"
//! target = [7.24]            # optional; defaults to the initial value
//!
//! [descent]
//! max_iters = 200
//! flow_mode = "projected_descent"
//!
//! [solver]
//! backend = "sparse"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use willmore_core::constraints::{ConstraintKind, ConstraintSpec};
use willmore_core::descent::{DescentConfig, FlowMode};
use willmore_core::saddle::{Backend, SolverOptions};

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Frame every `k` iterations; 0 disables frames.
    #[serde(default)]
    pub frame_interval: usize,
    pub dirichlet: Option<bool>,
    /// Subdivision level of preset meshes.
    pub level: Option<usize>,
    pub constraints: Option<Vec<ConstraintEntry>>,
    #[serde(default)]
    pub descent: DescentSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Barycenter,
    Area,
    Volume,
}

impl From<KindName> for ConstraintKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Barycenter => ConstraintKind::Barycenter,
            KindName::Area => ConstraintKind::Area,
            KindName::Volume => ConstraintKind::Volume,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub kind: KindName,
    pub target: Option<Vec<f64>>,
}

impl ConstraintEntry {
    pub fn to_spec(&self) -> ConstraintSpec {
        ConstraintSpec {
            kind: self.kind.into(),
            target: self.target.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FlowName {
    ProjectedDescent,
    SemiImplicit,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DescentSection {
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub constraint_tol: Option<f64>,
    pub armijo_c: Option<f64>,
    pub backtrack_factor: Option<f64>,
    pub tau_max: Option<f64>,
    pub max_backtracks: Option<usize>,
    pub max_restoration_iters: Option<usize>,
    pub max_projection_iters: Option<usize>,
    pub stall_window: Option<usize>,
    pub stall_rel_decrease: Option<f64>,
    pub flow_mode: Option<FlowName>,
    pub semi_implicit_tau: Option<f64>,
}

impl DescentSection {
    /// Overrides the fields of `base` that are set here.
    pub fn apply(&self, base: &mut DescentConfig) -> Result<(), CliError> {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { base.$f = v; } )* };
        }
        set!(
            max_iters,
            constraint_tol,
            armijo_c,
            backtrack_factor,
            tau_max,
            max_backtracks,
            max_restoration_iters,
            max_projection_iters,
            stall_window,
            stall_rel_decrease
        );
        if self.grad_tol.is_some() {
            base.grad_tol = self.grad_tol;
        }
        match (self.flow_mode, self.semi_implicit_tau) {
            (Some(FlowName::SemiImplicit), Some(tau)) => base.flow_mode = FlowMode::SemiImplicit { tau },
            (Some(FlowName::SemiImplicit), None) => {
                return Err(CliError::Config("flow_mode = \"semi_implicit\" needs semi_implicit_tau".into()))
            }
            (Some(FlowName::ProjectedDescent), Some(_)) => {
                return Err(CliError::Config("semi_implicit_tau is only used with flow_mode = \"semi_implicit\"".into()))
            }
            (Some(FlowName::ProjectedDescent), None) => base.flow_mode = FlowMode::ProjectedDescent,
            (None, Some(tau)) => match base.flow_mode {
                FlowMode::SemiImplicit { .. } => base.flow_mode = FlowMode::SemiImplicit { tau },
                FlowMode::ProjectedDescent => {
                    return Err(CliError::Config("semi_implicit_tau given without flow_mode = \"semi_implicit\"".into()))
                }
            },
            (None, None) => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BackendName {
    Sparse,
    Dense,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub backend: Option<BackendName>,
    pub solver_tol: Option<f64>,
    pub delay_tol: Option<f64>,
    pub singular_tol: Option<f64>,
    /// Writes every factorized saddle matrix in MatrixMarket format.
    pub dump_dir: Option<PathBuf>,
}

impl SolverSection {
    pub fn apply(&self, base: &mut SolverOptions, root: &Path) {
        if let Some(b) = self.backend {
            base.backend = match b {
                BackendName::Sparse => Backend::Sparse,
                BackendName::Dense => Backend::Dense,
            };
        }
        if let Some(v) = self.solver_tol {
            base.solver_tol = v;
        }
        if let Some(v) = self.delay_tol {
            base.delay_tol = v;
        }
        if let Some(v) = self.singular_tol {
            base.singular_tol = v;
        }
        if let Some(d) = &self.dump_dir {
            base.dump_dir = Some(root.join(d));
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::missing_or_io(path, e))?;
        Self::parse(&text)
    }

    /// Preset-only configuration with default settings.
    pub fn for_preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Self::default()
        }
    }
}
