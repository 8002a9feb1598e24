//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use willmore_cli::commands::RunReport;
use willmore_cli::presets::jitter;
use willmore_cli::{run_config, Preset, RunConfig};
use willmore_core::constraints::{ConstraintKind, ConstraintSet, ConstraintSpec};
use willmore_core::descent::{run, Descent, DescentConfig, Termination};
use willmore_core::fem::WillmoreState;
use willmore_core::mesh::{DofMap, TriMesh};
use willmore_core::saddle::{SaddleSolver, SaddleSystem, SolverOptions};
use willmore_core::shapes::icosphere;
use willmore_core::sparse::SymCsr;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}

fn mat_rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn shifted(mesh: &TriMesh, u: &DVector<f64>, h: f64) -> TriMesh {
    mesh.with_coords(&(mesh.coords() + u * h)).unwrap()
}

fn all_kinds() -> Vec<ConstraintSpec> {
    [ConstraintKind::Barycenter, ConstraintKind::Area, ConstraintKind::Volume]
        .map(ConstraintSpec::keep)
        .to_vec()
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn sphere_energy() -> Outcome {
    let start = Instant::now();
    let errs: Vec<f64> = (1..=4)
        .map(|l| {
            let m = icosphere(l);
            let w = WillmoreState::for_mesh(&m, &DofMap::free(&m)).unwrap().energy();
            (w - 4.0 * PI).abs() / (4.0 * PI)
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let listed: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    let detail = format!("relative errors {}, {secs:.2} s", listed.join(", "));
    check(monotone && errs[3] < 0.02 && secs < 10.0, detail)
}

fn gradient_exactness() -> Outcome {
    let start = Instant::now();
    let (mut eg, mut ej, mut edj, mut edb, mut eda) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mesh = jitter(&icosphere(2), 0.05, 200 + seed).unwrap();
        assert!(mesh.n_vertices() <= 200);
        let dofs = DofMap::free(&mesh);
        let n = 3 * mesh.n_vertices();
        let state = WillmoreState::for_mesh(&mesh, &dofs).unwrap();
        let energy = |m: &TriMesh| WillmoreState::for_mesh(m, &dofs).unwrap().energy();

        let h = 1e-5;
        let fd = DVector::from_fn(n, |i, _| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            (energy(&shifted(&mesh, &e, h)) - energy(&shifted(&mesh, &e, -h))) / (2.0 * h)
        });
        eg = eg.max(rel_err(&(-state.rhs()), &fd));

        let cs = ConstraintSet::new(&mesh, &all_kinds(), false).unwrap();
        let jac = cs.evaluate(&mesh, &dofs).jacobian;
        let fd_jac = DMatrix::from_fn(cs.n_rows(), n, |r, i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            let p = cs.evaluate(&shifted(&mesh, &e, h), &dofs).values;
            let m = cs.evaluate(&shifted(&mesh, &e, -h), &dofs).values;
            (p[r] - m[r]) / (2.0 * h)
        });
        for r in 0..cs.n_rows() {
            let a = jac.row(r).transpose();
            let b = fd_jac.row(r).transpose();
            ej = ej.max(rel_err(&a, &b));
        }

        let u = random_vector(&mut rng, n);
        let v = random_vector(&mut rng, n);
        let d = state.derivatives(&u).unwrap();
        let hd = 1e-6;
        let at = |t: f64| WillmoreState::for_mesh(&shifted(&mesh, &u, t), &dofs).unwrap();
        let (sp, sm) = (at(hd), at(-hd));
        let apply_j = |s: &WillmoreState| {
            let mut out = vec![0.0; n];
            s.h2_operator().mul_vec3(v.as_slice(), &mut out);
            DVector::from_vec(out)
        };
        let fd_dj = (apply_j(&sp) - apply_j(&sm)) / (2.0 * hd);
        edj = edj.max(rel_err(&d.apply_dj(&v), &fd_dj));
        let fd_db = (sp.rhs() - sm.rhs()) / (2.0 * hd);
        edb = edb.max(rel_err(&d.d_rhs(), &fd_db));
        let da = cs.jacobian_directional_derivative(&mesh, &dofs, &u).unwrap();
        let fd_da = (cs.evaluate(&shifted(&mesh, &u, hd), &dofs).jacobian
            - cs.evaluate(&shifted(&mesh, &u, -hd), &dofs).jacobian)
            / (2.0 * hd);
        eda = eda.max(mat_rel_err(&da, &fd_da));
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "gradient {eg:.1e}, jacobians {ej:.1e}, DJ {edj:.1e}, Db {edb:.1e}, DA {eda:.1e}, {secs:.2} s"
    );
    check(
        eg < 1e-6 && ej < 1e-7 && edj < 1e-5 && edb < 1e-5 && eda < 1e-5 && secs < 30.0,
        detail,
    )
}

/// Random sparse SPD scalar matrix: weighted graph Laplacian plus a positive shift.
fn random_spd(nv: usize, rng: &mut ChaCha8Rng) -> SymCsr {
    let mut rows = vec![vec![]; nv];
    let mut edges = vec![];
    for i in 0..nv {
        for _ in 0..2 {
            let j = rng.random_range(0..nv);
            if j != i {
                rows[i].push(j);
                rows[j].push(i);
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    let mut s = SymCsr::from_pattern(&rows);
    for i in 0..nv {
        s.add(i, i, rng.random_range(0.05..0.5));
    }
    for (i, j, w) in edges {
        s.add(i, i, w);
        s.add(j, j, w);
        s.add(i, j, -w);
        s.add(j, i, -w);
    }
    s
}

fn pseudoinverse_algebra() -> Outcome {
    let (mut e_proj, mut e_pinv, mut e_axiom) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let nv = rng.random_range(4..=20);
        let k = rng.random_range(1..=6);
        let s = random_spd(nv, &mut rng);
        let a = DMatrix::from_fn(k, 3 * nv, |_, _| rng.random_range(-1.0..1.0));
        let sys = SaddleSystem::new(s, a.clone()).unwrap();
        let j = sys.to_dense().view((0, 0), (3 * nv, 3 * nv)).into_owned();
        let fact = SaddleSolver::new(SolverOptions::default()).factorize(&sys).unwrap();

        // dense oracle: J⁻¹Aᵀ(AJ⁻¹Aᵀ)⁻¹
        let chol = j.clone().cholesky().unwrap();
        let jinv_at = chol.solve(&a.transpose());
        let oracle = &jinv_at * (&a * &jinv_at).try_inverse().unwrap();

        let columns: Vec<DVector<f64>> = (0..k)
            .map(|c| {
                let e = DVector::from_fn(k, |i, _| if i == c { 1.0 } else { 0.0 });
                fact.apply_pseudoinverse(&e).unwrap().primal
            })
            .collect();
        let pinv = DMatrix::from_columns(&columns);
        e_pinv = e_pinv.max(mat_rel_err(&pinv, &oracle));

        let b = random_vector(&mut rng, 3 * nv);
        let jinv_b = chol.solve(&b);
        let expect = &jinv_b - &oracle * (&a * &jinv_b);
        e_proj = e_proj.max(rel_err(&fact.solve_projected_gradient(&b).unwrap().primal, &expect));

        let p = &pinv * &a;
        let jp = &j * &p;
        let errs = [
            (&a * &p - &a).amax() / a.amax(),
            (&p * &pinv - &pinv).amax() / pinv.amax(),
            (&jp - jp.transpose()).amax() / j.amax(),
            (&p * &p - &p).amax() / p.amax(),
        ];
        e_axiom = errs.iter().fold(e_axiom, |m, &e| m.max(e));
    }
    let detail = format!("projection {e_proj:.1e}, pseudoinverse {e_pinv:.1e}, axioms {e_axiom:.1e}");
    check(e_proj < 1e-10 && e_pinv < 1e-10 && e_axiom < 1e-12, detail)
}

fn constraint_drift() -> Outcome {
    let mesh = jitter(&icosphere(2), 0.02, 400).unwrap();
    let specs = all_kinds();
    let cs = ConstraintSet::new(&mesh, &specs, false).unwrap();
    let mut d = Descent::new(&mesh, DescentConfig::default(), cs).unwrap();
    let a = d.assemble(&mesh).unwrap();
    let fact = d.factorize(&a.system).unwrap();
    let step = d.compute_step(&a, &fact).unwrap();
    let path = d.compute_path(&a, &step, &fact).unwrap();
    let phi0 = d.constraints().residual(&mesh).0;
    let ts: Vec<f64> = (0..9).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect();
    let drift: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let m = mesh.with_coords(&path.eval(t)).unwrap();
            (d.constraints().residual(&m).0 - &phi0).norm()
        })
        .collect();
    let slope = loglog_slope(&ts, &drift);
    check(slope >= 2.7, format!("slope {slope:.3} over t in [1e-3, 1e-1]"))
}

fn feasible_descent() -> Outcome {
    let job = Preset::SphereSanity.jobs(Some(4)).unwrap().remove(0);
    let cs = ConstraintSet::new(&job.mesh, &job.constraints, false).unwrap();
    let config = DescentConfig {
        max_iters: 50,
        grad_tol: Some(1e-300),
        ..DescentConfig::default()
    };
    let start = Instant::now();
    let state = run(&job.mesh, config, cs).map_err(|e| e.error.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let h = &state.history;
    let monotone = h.windows(2).all(|w| w[1].energy <= w[0].energy);
    let worst = h.iter().map(|r| r.violation).fold(0.0, f64::max);
    let detail = format!(
        "{} faces, {} iterations, W {:.4} -> {:.4}, max violation {worst:.1e}, {secs:.2} s",
        job.mesh.n_faces(),
        state.iterations,
        h[0].energy,
        state.energy
    );
    check(state.iterations == 50 && monotone && worst <= 1e-9 && secs < 60.0, detail)
}

fn preset_report(name: &str, root: &Path) -> Result<RunReport, String> {
    let mut config = RunConfig::for_preset(name);
    config.output_dir = Some(name.into());
    run_config(&config, root).map_err(|e| e.to_string())
}

fn canham(report: &RunReport) -> Outcome {
    let energy = |n: &str| report.jobs.iter().find(|j| j.summary.name == n).map(|j| &j.summary);
    let (p, b) = (energy("prolate").unwrap(), energy("biconcave").unwrap());
    let gap = (p.final_energy - b.final_energy) / p.final_energy;
    let settled = |s: &willmore_cli::JobSummary| s.termination != Termination::MaxIterations && s.monotone;
    let detail = format!(
        "{} faces, prolate {:.4} ({} it), biconcave {:.4} ({} it), gap {:.1}%",
        p.faces,
        p.final_energy,
        p.iterations,
        b.final_energy,
        b.iterations,
        100.0 * gap
    );
    check(settled(p) && settled(b) && gap > 0.05, detail)
}

fn cylinders(minimal: &RunReport, nonminimal: &RunReport) -> Outcome {
    let m = &minimal.jobs[0].summary;
    let n = &nonminimal.jobs[0].summary;
    let rm = m.final_mean_curvature_l2 / m.initial_mean_curvature_l2;
    let rn = n.final_mean_curvature_l2 / n.initial_mean_curvature_l2;
    let detail = format!(
        "minimal |H| ratio {rm:.2e} ({:?}), nonminimal |H| ratio {rn:.3} ({:?}, monotone {})",
        m.termination, n.termination, n.monotone
    );
    check(
        rm < 0.01 && m.termination == Termination::Converged && n.termination == Termination::Converged && n.monotone && rn > 0.1,
        detail,
    )
}

fn subdivision(report: &RunReport) -> Outcome {
    let (a, b) = (&report.jobs[0].summary, &report.jobs[1].summary);
    let diff = (a.final_energy - b.final_energy).abs() / a.final_energy.max(b.final_energy);
    let detail = format!(
        "{} ({} faces, {} it) {:.4} vs {} ({} faces, {} it) {:.4}, difference {:.1}%",
        a.name,
        a.faces,
        a.iterations,
        a.final_energy,
        b.name,
        b.faces,
        b.iterations,
        b.final_energy,
        100.0 * diff
    );
    check(a.iterations == 60 && b.iterations == 60 && diff < 0.1, detail)
}

fn timing_report(reports: &[&RunReport]) -> Outcome {
    let mut rows = 0;
    for r in reports {
        let summary = std::fs::read_to_string(r.output_dir.join("summary.txt")).map_err(|e| e.to_string())?;
        if !(summary.contains("init (faces/s)") && summary.contains("iter (faces/s)")) {
            return Err(format!("no timing table in {}", r.output_dir.display()));
        }
        for j in &r.jobs {
            let t = &j.summary.timing;
            let timings = j.dir.join("timings.csv");
            if !(t.init_time > 0.0 && t.iter_time > 0.0 && t.iter_speed.is_finite() && timings.exists()) {
                return Err(format!("incomplete timings for {}", j.summary.name));
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} jobs with init time, per-iteration time and faces/s"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let root = dir.path();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "sphere energy convergence", sphere_energy()),
        (2, "gradient exactness", gradient_exactness()),
        (3, "pseudoinverse algebra", pseudoinverse_algebra()),
        (4, "third-order constraint drift", constraint_drift()),
        (5, "feasible monotone descent", feasible_descent()),
    ];
    let canham_run = preset_report("canham", root);
    let minimal = preset_report("cylinder-dirichlet-minimal", root);
    let nonminimal = preset_report("cylinder-dirichlet-nonminimal", root);
    let handlebody = preset_report("handlebody-commutation", root);
    results.push((6, "canham ordering", canham_run.as_ref().map_err(Clone::clone).and_then(canham)));
    results.push((
        7,
        "dirichlet cylinders",
        match (&minimal, &nonminimal) {
            (Ok(m), Ok(n)) => cylinders(m, n),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        },
    ));
    results.push((8, "subdivision robustness", handlebody.as_ref().map_err(Clone::clone).and_then(subdivision)));
    let reports: Vec<&RunReport> = [&canham_run, &minimal, &nonminimal, &handlebody]
        .into_iter()
        .filter_map(|r| r.as_ref().ok())
        .collect();
    results.push((9, "throughput report", if reports.len() == 4 { timing_report(&reports) } else { Err("a preset run failed".into()) }));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS {n}. {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {n}. {name}: {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
