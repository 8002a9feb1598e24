use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::Vector3;
use willmore_core::mesh::io::{load_mesh_auto, save_mesh_auto};
use willmore_core::shapes::{grid_patch, icosahedron, icosphere, unit_cube};

fn willmore(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

#[test]
fn check_reports_cube_volume() {
    let dir = tempfile::tempdir().unwrap();
    save_mesh_auto(dir.path().join("cube.obj"), &unit_cube()).unwrap();
    let o = willmore(&["check", "cube.obj"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((field(&text, "volume:") - 1.0).abs() < 1e-12);
    assert!((field(&text, "area:") - 6.0).abs() < 1e-12);
    assert_eq!(field(&text, "euler characteristic:"), 2.0);
}

#[test]
fn check_reports_sphere_energy_near_four_pi() {
    let dir = tempfile::tempdir().unwrap();
    save_mesh_auto(dir.path().join("s.ply"), &icosphere(3)).unwrap();
    let o = willmore(&["check", "s.ply"], dir.path());
    assert!(o.status.success());
    let w = field(&stdout(&o), "willmore energy:");
    assert!((w - 4.0 * std::f64::consts::PI).abs() < 0.05 * 4.0 * std::f64::consts::PI, "{w}");
}

#[test]
fn check_open_patch_has_no_volume() {
    let dir = tempfile::tempdir().unwrap();
    save_mesh_auto(dir.path().join("p.obj"), &grid_patch(4, 4, 1.0)).unwrap();
    let o = willmore(&["check", "p.obj"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("volume: n/a (open mesh)"));
    assert!(text.contains("boundary: open (16 boundary vertices)"), "{text}");
}

#[test]
fn missing_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(willmore(&["check", "nope.obj"], dir.path()).status.code(), Some(2));
    assert_eq!(willmore(&["run", "nope.toml"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("c.toml"), "input = \"nope.obj\"\n").unwrap();
    assert_eq!(willmore(&["run", "c.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(willmore(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn subdivide_quadruples_faces() {
    let dir = tempfile::tempdir().unwrap();
    save_mesh_auto(dir.path().join("ico.obj"), &icosahedron()).unwrap();
    for (levels, faces) in [("1", 80), ("2", 320)] {
        let o = willmore(&["subdivide", "ico.obj", "--levels", levels, "--out", "out.obj"], dir.path());
        assert!(o.status.success());
        assert_eq!(load_mesh_auto(dir.path().join("out.obj")).unwrap().n_faces(), faces);
    }
    let o = willmore(&["subdivide", "ico.obj", "--levels", "0", "--out", "out.obj"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "preset = \"sphere-sanity\"\nmax_iters = 3\n").unwrap();
    let o = willmore(&["run", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("max_iters"));
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ellipsoid = icosphere(1).map_positions(|p| Vector3::new(p.x, 1.2 * p.y, 0.9 * p.z)).unwrap();
    save_mesh_auto(dir.path().join("ico.obj"), &ellipsoid).unwrap();
    let config = |out: &str| {
        format!(
            "input = \"ico.obj\"\noutput_dir = \"{out}\"\nframe_interval = 2\n\
             [[constraints]]\nkind = \"barycenter\"\n[[constraints]]\nkind = \"area\"\n\
             [descent]\nmax_iters = 6\n"
        )
    };
    let mut histories = vec![];
    for out in ["a", "b"] {
        fs::write(dir.path().join(format!("{out}.toml")), config(out)).unwrap();
        let o = willmore(&["run", &format!("{out}.toml")], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let d = dir.path().join(out);
        for f in ["history.csv", "timings.csv", "final.obj", "summary.txt", "frames/frame_0000.obj", "frames/frame_0002.obj"] {
            assert!(d.join(f).exists(), "missing {f}");
        }
        histories.push(fs::read(d.join("history.csv")).unwrap());
    }
    assert_eq!(histories[0], histories[1]);
    let text = String::from_utf8(histories.remove(0)).unwrap();
    assert!(text.starts_with("iter,energy,grad_norm_j,constraint_violation,tau,tau0,backtracks,restoration_iters\n"));
    let rows = text.lines().count() - 1;
    let summary = fs::read_to_string(dir.path().join("a/summary.txt")).unwrap();
    assert_eq!(rows, field(&summary, "iterations:") as usize + 1);
}

#[test]
fn sphere_sanity_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), "preset = \"sphere-sanity\"\nlevel = 2\noutput_dir = \"s\"\n").unwrap();
    let o = willmore(&["run", "s.toml"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("monotone energy: true"));
    assert!(field(&text, "final energy:") < field(&text, "initial energy:"));
    assert!(field(&text, "max constraint violation:") <= 1e-9);
}

#[test]
fn parallel_jobs_match_sequential_ones() {
    let dir = tempfile::tempdir().unwrap();
    let mut histories = vec![];
    for (threads, out) in [("1", "seq"), ("2", "par")] {
        let cfg = format!("{out}.toml");
        fs::write(
            dir.path().join(&cfg),
            format!("preset = \"canham\"\nlevel = 1\noutput_dir = \"{out}\"\n[descent]\nmax_iters = 5\n"),
        )
        .unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_willmore"))
            .args(["run", &cfg])
            .env("WILLMORE_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        for job in ["prolate", "biconcave"] {
            histories.push(fs::read(dir.path().join(out).join(job).join("history.csv")).unwrap());
        }
    }
    assert_eq!(histories[0], histories[2]);
    assert_eq!(histories[1], histories[3]);

    let o = Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(["run", "seq.toml"])
        .env("WILLMORE_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
