use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use willmore_core::constraints::{enclosed_volume_value, surface_area_value, ConstraintSet};
use willmore_core::descent::{run_with_observer, DescentState};
use willmore_core::fem::WillmoreState;
use willmore_core::mesh::io::{load_mesh_auto, save_mesh_auto, write_frame};
use willmore_core::mesh::{loop_subdivide, DofMap, MeshError, TriMesh};

use crate::config::RunConfig;
use crate::presets::{Job, Preset};
use crate::report::{timing_table, write_history, write_timings, JobSummary};
use crate::CliError;

pub const DEFAULT_OUTPUT_DIR: &str = "willmore-out";
/// Number of jobs of a multi-job preset run concurrently; default 1.
pub const THREADS_ENV: &str = "WILLMORE_THREADS";

fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

#[derive(Debug)]
pub struct JobOutcome {
    pub summary: JobSummary,
    pub state: DescentState,
    pub dir: PathBuf,
}

#[derive(Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub jobs: Vec<JobOutcome>,
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for j in &self.jobs {
            s.push_str(&j.summary.render());
            s.push('\n');
        }
        s.push_str("timings (initialization: patterns, symbolic analysis, initial projection; iteration: mean of the first 30 steps)\n");
        let rows: Vec<_> = self.jobs.iter().map(|j| (j.summary.name.clone(), j.summary.timing.clone())).collect();
        s.push_str(&timing_table(&rows));
        s
    }
}

/// Loads the configuration at `path` and executes it.
pub fn cmd_run(path: &Path) -> Result<RunReport, CliError> {
    let config = RunConfig::load(path)?;
    let root = path.parent().unwrap_or(Path::new("."));
    run_config(&config, root)
}

/// Expands `config` into jobs, with relative paths taken from `root`.
pub fn resolve_jobs(config: &RunConfig, root: &Path) -> Result<Vec<Job>, CliError> {
    let mut jobs = match (&config.preset, &config.input) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("`input` cannot be combined with a preset, which generates its own meshes".into()))
        }
        (None, None) => return Err(CliError::Usage("the configuration needs `input` or `preset`".into())),
        (Some(name), None) => name.parse::<Preset>()?.jobs(config.level)?,
        (None, Some(input)) => {
            if config.level.is_some() {
                return Err(CliError::Config("`level` only applies to presets".into()));
            }
            let path = root.join(input);
            if !path.exists() {
                return Err(CliError::MissingFile(path));
            }
            let mesh = load_mesh_auto(&path)?;
            let name = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            vec![Job {
                name,
                mesh,
                constraints: Vec::new(),
                dirichlet: false,
                descent: Default::default(),
            }]
        }
    };
    for job in &mut jobs {
        if let Some(cs) = &config.constraints {
            job.constraints = cs.iter().map(|c| c.to_spec()).collect();
        }
        if let Some(d) = config.dirichlet {
            job.dirichlet = d;
        }
        config.descent.apply(&mut job.descent)?;
        config.solver.apply(&mut job.descent.solver, root);
        job.descent.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(jobs)
}

pub fn run_config(config: &RunConfig, root: &Path) -> Result<RunReport, CliError> {
    let jobs = resolve_jobs(config, root)?;
    let output_dir = root.join(config.output_dir.as_deref().unwrap_or(Path::new(DEFAULT_OUTPUT_DIR)));
    let multi = jobs.len() > 1;
    let threads = thread_count()?;
    let mut outcomes = Vec::with_capacity(jobs.len());
    let mut pending = jobs.into_iter().peekable();
    while pending.peek().is_some() {
        let batch: Vec<Job> = pending.by_ref().take(threads).collect();
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .into_iter()
                .map(|job| {
                    let dir = if multi { output_dir.join(&job.name) } else { output_dir.clone() };
                    scope.spawn(move || run_job(job, &dir, config.frame_interval, multi))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("job thread panicked")).collect()
        });
        for r in results {
            outcomes.push(r?);
        }
    }
    let report = RunReport {
        output_dir: output_dir.clone(),
        jobs: outcomes,
    };
    write_file(&output_dir.join("summary.txt"), &report.render())?;
    Ok(report)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn mean_curvature_norm(mesh: &TriMesh, dirichlet: bool) -> Result<f64, CliError> {
    let dofs = DofMap::new(mesh, dirichlet);
    Ok(WillmoreState::for_mesh(mesh, &dofs)?.mean_curvature_l2())
}

fn run_job(job: Job, dir: &Path, frame_interval: usize, own_summary: bool) -> Result<JobOutcome, CliError> {
    create_dir(dir)?;
    let frames = dir.join("frames");
    if frame_interval > 0 {
        create_dir(&frames)?;
    }
    let constraints = ConstraintSet::new(&job.mesh, &job.constraints, job.dirichlet)?;
    let initial_h = mean_curvature_norm(&job.mesh, job.dirichlet)?;
    log::info!(
        "job {}: {} vertices, {} faces, {} constraint rows",
        job.name,
        job.mesh.n_vertices(),
        job.mesh.n_faces(),
        constraints.n_rows()
    );

    let mut frame_error: Option<MeshError> = None;
    let mut observer = |rec: &willmore_core::descent::IterationRecord, mesh: &TriMesh| {
        log::info!(
            "{} iter {:4}  W = {:.10}  |u|_J = {:.3e}  tau = {:.3e}",
            job.name,
            rec.iter,
            rec.energy,
            rec.grad_norm_j,
            rec.tau
        );
        if frame_interval > 0 && rec.iter.is_multiple_of(frame_interval) && frame_error.is_none() {
            if let Err(e) = write_frame(&frames, rec.iter, mesh) {
                frame_error = Some(e);
            }
        }
    };
    let result = run_with_observer(&job.mesh, job.descent.clone(), constraints, &mut observer);
    if let Some(e) = frame_error {
        return Err(e.into());
    }
    let state = match result {
        Ok(s) => s,
        Err(f) => {
            if let Some(p) = &f.partial {
                write_history(create(&dir.join("history.csv"))?, &p.history)?;
            }
            return Err(CliError::descent(&job.name, f));
        }
    };
    write_history(create(&dir.join("history.csv"))?, &state.history)?;
    write_timings(create(&dir.join("timings.csv"))?, &state.history)?;
    save_mesh_auto(dir.join("final.obj"), &state.mesh)?;
    let final_h = mean_curvature_norm(&state.mesh, job.dirichlet)?;
    let summary = JobSummary::new(&job.name, &state, initial_h, final_h);
    if own_summary {
        write_file(&dir.join("summary.txt"), &summary.render())?;
    }
    Ok(JobOutcome {
        summary,
        state,
        dir: dir.to_path_buf(),
    })
}

/// Mesh statistics printed by `check`.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub vertices: usize,
    pub faces: usize,
    pub closed: bool,
    pub boundary_vertices: usize,
    pub euler_characteristic: i64,
    pub area: f64,
    pub volume: Option<f64>,
    pub energy: f64,
    pub mean_curvature_l2: f64,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertices)?;
        writeln!(f, "faces: {}", self.faces)?;
        if self.closed {
            writeln!(f, "boundary: closed")?;
        } else {
            writeln!(f, "boundary: open ({} boundary vertices)", self.boundary_vertices)?;
        }
        writeln!(f, "euler characteristic: {}", self.euler_characteristic)?;
        writeln!(f, "area: {:.12}", self.area)?;
        match self.volume {
            Some(v) => writeln!(f, "volume: {v:.12}")?,
            None => writeln!(f, "volume: n/a (open mesh)")?,
        }
        writeln!(f, "willmore energy: {:.12}", self.energy)?;
        writeln!(f, "mean curvature L2: {:.12}", self.mean_curvature_l2)
    }
}

fn load_checked(path: &Path) -> Result<TriMesh, CliError> {
    if !path.exists() {
        return Err(CliError::MissingFile(path.to_path_buf()));
    }
    load_mesh_auto(path).map_err(|e| match e {
        MeshError::Io { .. } => CliError::Mesh(e),
        other => CliError::Validation(vec![other.to_string()]),
    })
}

pub fn cmd_check(path: &Path) -> Result<CheckReport, CliError> {
    let mesh = load_checked(path)?;
    let dofs = DofMap::free(&mesh);
    let state = WillmoreState::for_mesh(&mesh, &dofs).map_err(|e| CliError::Validation(vec![e.to_string()]))?;
    let closed = mesh.is_closed();
    Ok(CheckReport {
        vertices: mesh.n_vertices(),
        faces: mesh.n_faces(),
        closed,
        boundary_vertices: mesh.boundary_vertex().iter().filter(|&&b| b).count(),
        euler_characteristic: mesh.euler_characteristic(),
        area: surface_area_value(&mesh),
        volume: closed.then(|| enclosed_volume_value(&mesh)),
        energy: state.energy(),
        mean_curvature_l2: state.mean_curvature_l2(),
    })
}

/// Applies `levels` Loop subdivisions and writes the result to `out`.
pub fn cmd_subdivide(path: &Path, levels: usize, out: &Path) -> Result<TriMesh, CliError> {
    if levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let mut mesh = load_checked(path)?;
    for _ in 0..levels {
        mesh = loop_subdivide(&mesh)?;
    }
    save_mesh_auto(out, &mesh)?;
    Ok(mesh)
}
