//! OBJ and ASCII PLY readers and writers.
//!
//! Only vertex positions and triangle faces are handled. Polygons with more
//! than three corners are rejected rather than split. Coordinates are written
//! with Rust's shortest round-trip float formatting, so write-then-read is
//! exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use super::{MeshError, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self, MeshError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::Ply),
            other => Err(MeshError::UnsupportedFormat(other.to_string())),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> MeshError {
    MeshError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads and validates a mesh file.
pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::Ply => parse_ply(&text),
    }
}

/// Reads a mesh, choosing the format from the file extension.
pub fn load_mesh_auto(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    load_mesh(path, MeshFormat::from_path(path)?)
}

pub fn save_mesh(path: impl AsRef<Path>, mesh: &TriMesh, format: MeshFormat) -> Result<(), MeshError> {
    let path = path.as_ref();
    let text = match format {
        MeshFormat::Obj => to_obj_string(mesh),
        MeshFormat::Ply => to_ply_string(mesh),
    };
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn save_mesh_auto(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<(), MeshError> {
    let path = path.as_ref();
    save_mesh(path, mesh, MeshFormat::from_path(path)?)
}

/// Path of frame `index` in an OBJ sequence: `dir/frame_0000.obj`, ...
pub fn frame_path(dir: impl AsRef<Path>, index: usize) -> PathBuf {
    dir.as_ref().join(format!("frame_{index:04}.obj"))
}

pub fn write_frame(dir: impl AsRef<Path>, index: usize, mesh: &TriMesh) -> Result<PathBuf, MeshError> {
    let path = frame_path(dir, index);
    save_mesh(&path, mesh, MeshFormat::Obj)?;
    Ok(path)
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, MeshError> {
    let tok = tok.ok_or_else(|| MeshError::Parse {
        line,
        msg: "missing coordinate".into(),
    })?;
    tok.parse().map_err(|_| MeshError::Parse {
        line,
        msg: format!("invalid number `{tok}`"),
    })
}

pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                positions.push(Vector3::new(x, y, z));
            }
            Some("f") => {
                let corners: Vec<&str> = toks.collect();
                if corners.len() != 3 {
                    return Err(MeshError::NonTriangleFace {
                        line,
                        count: corners.len(),
                    });
                }
                let mut face = [0usize; 3];
                for (slot, c) in face.iter_mut().zip(&corners) {
                    let idx = c.split('/').next().unwrap_or("");
                    let i: i64 = idx.parse().map_err(|_| MeshError::Parse {
                        line,
                        msg: format!("invalid face index `{c}`"),
                    })?;
                    // OBJ is 1-based; negative indices count back from the
                    // most recent vertex.
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        positions.len() as i64 + i
                    } else {
                        -1
                    };
                    if resolved < 0 {
                        return Err(MeshError::Parse {
                            line,
                            msg: format!("face index `{c}` out of range"),
                        });
                    }
                    *slot = resolved as usize;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriMesh::new(positions, faces)
}

pub fn to_obj_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(40 * (mesh.n_vertices() + mesh.n_faces()));
    for p in mesh.positions() {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn parse_ply(text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => {
            return Err(MeshError::Parse {
                line: 1,
                msg: "missing `ply` magic".into(),
            })
        }
    }
    let mut n_vertices = None;
    let mut n_faces = None;
    let mut current = "";
    let mut vertex_props: Vec<String> = Vec::new();
    let mut header_done = false;
    for (lineno, l) in lines.by_ref() {
        let line = lineno + 1;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["format", fmt, ..] => {
                if *fmt != "ascii" {
                    return Err(MeshError::Parse {
                        line,
                        msg: format!("unsupported PLY format `{fmt}` (ASCII only)"),
                    });
                }
            }
            ["element", name, count] => {
                let c: usize = count.parse().map_err(|_| MeshError::Parse {
                    line,
                    msg: format!("invalid element count `{count}`"),
                })?;
                current = if *name == "vertex" {
                    n_vertices = Some(c);
                    "vertex"
                } else if *name == "face" {
                    n_faces = Some(c);
                    "face"
                } else if c == 0 {
                    "other"
                } else {
                    return Err(MeshError::Parse {
                        line,
                        msg: format!("unsupported element `{name}`"),
                    });
                };
            }
            ["property", "list", ..] => {}
            ["property", _ty, name] if current == "vertex" => vertex_props.push(name.to_string()),
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(MeshError::Parse {
            line: 0,
            msg: "missing end_header".into(),
        });
    }
    let nv = n_vertices.unwrap_or(0);
    let nf = n_faces.unwrap_or(0);
    let axis = |name: &str| vertex_props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (axis("x"), axis("y"), axis("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => {
            return Err(MeshError::Parse {
                line: 0,
                msg: "vertex element lacks x/y/z".into(),
            })
        }
    };

    let mut positions = Vec::with_capacity(nv);
    let mut faces = Vec::with_capacity(nf);
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty());
    for _ in 0..nv {
        let (lineno, l) = body.next().ok_or(MeshError::Parse {
            line: 0,
            msg: "unexpected end of vertex list".into(),
        })?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let get = |i: usize| parse_f64(toks.get(i).copied(), lineno + 1);
        positions.push(Vector3::new(get(ix)?, get(iy)?, get(iz)?));
    }
    for _ in 0..nf {
        let (lineno, l) = body.next().ok_or(MeshError::Parse {
            line: 0,
            msg: "unexpected end of face list".into(),
        })?;
        let line = lineno + 1;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| MeshError::Parse {
                line,
                msg: "invalid face record".into(),
            })?;
        match idx.as_slice() {
            [3, a, b, c, ..] => faces.push([*a, *b, *c]),
            [n, ..] => return Err(MeshError::NonTriangleFace { line, count: *n }),
            [] => {
                return Err(MeshError::Parse {
                    line,
                    msg: "empty face record".into(),
                })
            }
        }
    }
    TriMesh::new(positions, faces)
}

pub fn to_ply_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.n_vertices(),
        mesh.n_faces()
    );
    for p in mesh.positions() {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}
