//! Wavefront OBJ meshes: `v`, `vt` and `f` records.
//!
//! Polygons are fan triangulated. Corner references may be `v`, `v/vt` or
//! `v/vt/vn`; every face must either carry texture coordinates or none may,
//! since per-corner UVs are returned as one flat list. Negative indices
//! count back from the most recently declared vertex, per the OBJ
//! convention. Other record types are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::renderable::TriMesh;

fn parse_err(file: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.display().to_string(),
        message: format!("line {line}: {}", message.into()),
    }
}

fn parse_float(file: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(file, line, format!("bad number `{tok}`")))
}

struct Corner {
    vertex: usize,
    uv: Option<usize>,
}

fn resolve(file: &Path, line: usize, idx: i64, len: usize, what: &str) -> Result<usize> {
    let abs = if idx > 0 {
        idx - 1
    } else if idx < 0 {
        len as i64 + idx
    } else {
        return Err(parse_err(file, line, format!("{what} index 0 is not allowed")));
    };
    if abs < 0 || abs as usize >= len {
        return Err(parse_err(
            file,
            line,
            format!("{what} index {idx} out of range"),
        ));
    }
    Ok(abs as usize)
}

fn parse_corner(
    file: &Path,
    line: usize,
    tok: &str,
    n_vertices: usize,
    n_uvs: usize,
) -> Result<Corner> {
    let fields: Vec<&str> = tok.split('/').collect();
    if fields.len() > 3 || fields[0].is_empty() {
        return Err(parse_err(file, line, format!("bad face corner `{tok}`")));
    }
    let vi: i64 = fields[0]
        .parse()
        .map_err(|_| parse_err(file, line, format!("bad face corner `{tok}`")))?;
    let vertex = resolve(file, line, vi, n_vertices, "vertex")?;
    let uv = match fields.get(1) {
        Some(f) if !f.is_empty() => {
            let ti: i64 = f
                .parse()
                .map_err(|_| parse_err(file, line, format!("bad face corner `{tok}`")))?;
            Some(resolve(file, line, ti, n_uvs, "texture")?)
        }
        _ => None,
    };
    if let Some(f) = fields.get(2) {
        if !f.is_empty() {
            let _: i64 = f
                .parse()
                .map_err(|_| parse_err(file, line, format!("bad face corner `{tok}`")))?;
        }
    }
    Ok(Corner { vertex, uv })
}

/// Loads an OBJ mesh, returning per-corner UVs when the faces carry them.
pub fn load_obj(path: impl AsRef<Path>) -> Result<(TriMesh, Option<Vec<[[f64; 2]; 3]>>)> {
    let file = path.as_ref();
    let text = fs::read_to_string(file).map_err(Error::Io)?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut uvs: Vec<[f64; 2]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut faces_uv: Vec<[[f64; 2]; 3]> = Vec::new();
    let mut has_uv: Option<bool> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in &mut coords {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| parse_err(file, line, "vertex needs 3 coordinates"))?;
                    *c = parse_float(file, line, tok)?;
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("vt") => {
                let mut coords = [0.0; 2];
                for c in &mut coords {
                    let tok = tokens.next().ok_or_else(|| {
                        parse_err(file, line, "texture coordinate needs 2 values")
                    })?;
                    *c = parse_float(file, line, tok)?;
                }
                uvs.push(coords);
            }
            Some("f") => {
                let corners: Vec<Corner> = tokens
                    .map(|tok| parse_corner(file, line, tok, vertices.len(), uvs.len()))
                    .collect::<Result<_>>()?;
                if corners.len() < 3 {
                    return Err(parse_err(file, line, "face needs at least 3 corners"));
                }
                let face_has_uv = corners[0].uv.is_some();
                if corners.iter().any(|c| c.uv.is_some() != face_has_uv) {
                    return Err(parse_err(
                        file,
                        line,
                        "face mixes corners with and without texture coordinates",
                    ));
                }
                match has_uv {
                    None => has_uv = Some(face_has_uv),
                    Some(prev) if prev != face_has_uv => {
                        return Err(parse_err(
                            file,
                            line,
                            "some faces have texture coordinates and some do not",
                        ));
                    }
                    _ => {}
                }
                for k in 1..corners.len() - 1 {
                    let tri = [&corners[0], &corners[k], &corners[k + 1]];
                    faces.push(tri.map(|c| c.vertex as u32));
                    if face_has_uv {
                        faces_uv.push(tri.map(|c| uvs[c.uv.unwrap()]));
                    }
                }
            }
            _ => {}
        }
    }

    let mesh = TriMesh::new(vertices, faces)?;
    let faces_uv = match has_uv {
        Some(true) => Some(faces_uv),
        _ => None,
    };
    Ok((mesh, faces_uv))
}

/// Saves a mesh as OBJ, emitting per-corner `vt` records when UVs are given.
pub fn save_obj(
    mesh: &TriMesh,
    faces_uv: Option<&[[[f64; 2]; 3]]>,
    path: impl AsRef<Path>,
) -> Result<()> {
    if let Some(uv) = faces_uv {
        if uv.len() != mesh.faces.len() {
            return Err(Error::InvalidSettings(format!(
                "{} UV faces for {} mesh faces",
                uv.len(),
                mesh.faces.len()
            )));
        }
    }
    let mut out = String::new();
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    match faces_uv {
        Some(uv_faces) => {
            for face in uv_faces {
                for [u, v] in face {
                    writeln!(out, "vt {u} {v}").unwrap();
                }
            }
            for (i, f) in mesh.faces.iter().enumerate() {
                let t = 3 * i + 1;
                writeln!(
                    out,
                    "f {}/{} {}/{} {}/{}",
                    f[0] + 1,
                    t,
                    f[1] + 1,
                    t + 1,
                    f[2] + 1,
                    t + 2
                )
                .unwrap();
            }
        }
        None => {
            for f in &mesh.faces {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}
