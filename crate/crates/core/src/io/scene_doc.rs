//! Scene documents: canonical JSON text plus binary sidecars.
//!
//! A document is a single JSON object with the keys `version`, `settings`,
//! `camera`, `renderables` and `lights`. Writing is canonical: object keys
//! sorted, floats printed with 9 significant digits, rotations stored as
//! unit quaternions with w >= 0, arrays of leaf values on one line. Arrays
//! holding more than [`SIDECAR_THRESHOLD`] scalars move to little-endian
//! `.bin` sidecar files referenced as `{file, dtype, shape, digest}`;
//! in-memory textures become `.png` sidecars. Saving then loading (or the
//! other way around) reproduces the same bytes.
//!
//! Loading is strict: unknown keys and malformed values are rejected with a
//! JSON-pointer-style path. Rotations may be given as any of `quaternion`,
//! `axis_angle`, `euler_xyz` or `matrix`; material presets (`metal`,
//! `plastic`) expand to their principled parameters on load.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::appearance::{Appearance, ColorSource, Material, MaterialPreset, UVMap};
use crate::camera::{Camera, CameraKind};
use crate::error::{Error, Result};
use crate::io::png::{read_png, write_png};
use crate::light::{AreaShape, Light};
use crate::math::{to_quaternion, Mat3, Pose, RotationSpec, UnitQuat, Vec3};
use crate::renderable::{FaceSegments, PointCloud, PointColors, PointShape, TriMesh};
use crate::scene::{Renderable, RenderSettings, Scene};
use crate::trajectory::{Keypoint, Trajectory};

/// Arrays with more scalars than this are written to sidecar files.
pub const SIDECAR_THRESHOLD: usize = 256;

const DOC_VERSION: u64 = 1;

// ---------------------------------------------------------------- writing

fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn fnum(x: f64) -> Result<Value> {
    if !x.is_finite() {
        return Err(Error::InvalidSettings(format!(
            "cannot store non-finite number {x} in a scene document"
        )));
    }
    Ok(Value::from(x))
}

fn f64_row(vals: &[f64]) -> Result<Value> {
    Ok(Value::Array(
        vals.iter().map(|&v| fnum(v)).collect::<Result<_>>()?,
    ))
}

fn is_leaf(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(_) => out.push_str(&v.to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(is_leaf) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, level);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    indent(out, level + 1);
                    write_value(out, item, level + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                indent(out, level);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                indent(out, level + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, level + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push('}');
        }
    }
}

/// Renders a document tree as canonical text: sorted keys, 9-significant-
/// digit floats, arrays of leaf values on one line.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct DocWriter<'a> {
    dir: &'a Path,
    stem: String,
    used_names: BTreeSet<String>,
}

impl DocWriter<'_> {
    fn sidecar_name(&mut self, tag: &str, field: &str, ext: &str) -> String {
        let safe: String = tag
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let mut name = format!("{}.{safe}.{field}.{ext}", self.stem);
        let mut n = 1;
        while !self.used_names.insert(name.clone()) {
            name = format!("{}.{safe}_{n}.{field}.{ext}", self.stem);
            n += 1;
        }
        name
    }

    fn write_bin(
        &mut self,
        tag: &str,
        field: &str,
        dtype: &str,
        shape: &[usize],
        bytes: &[u8],
    ) -> Result<Value> {
        let name = self.sidecar_name(tag, field, "bin");
        fs::write(self.dir.join(&name), bytes)?;
        Ok(json!({
            "file": name,
            "dtype": dtype,
            "shape": shape,
            "digest": hex_digest(bytes),
        }))
    }
}

fn f64_bytes(vals: impl Iterator<Item = f64>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for v in vals {
        if !v.is_finite() {
            return Err(Error::InvalidSettings(format!(
                "cannot store non-finite number {v} in a scene document"
            )));
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn vec3_field(w: &mut DocWriter, tag: &str, field: &str, data: &[Vec3]) -> Result<Value> {
    if data.len() * 3 <= SIDECAR_THRESHOLD {
        let rows: Vec<Value> = data
            .iter()
            .map(|p| f64_row(&[p.x, p.y, p.z]))
            .collect::<Result<_>>()?;
        Ok(Value::Array(rows))
    } else {
        let bytes = f64_bytes(data.iter().flat_map(|p| [p.x, p.y, p.z]))?;
        w.write_bin(tag, field, "f64", &[data.len(), 3], &bytes)
    }
}

fn faces_field(w: &mut DocWriter, tag: &str, field: &str, data: &[[u32; 3]]) -> Result<Value> {
    if data.len() * 3 <= SIDECAR_THRESHOLD {
        Ok(Value::Array(
            data.iter().map(|f| json!([f[0], f[1], f[2]])).collect(),
        ))
    } else {
        let bytes: Vec<u8> = data
            .iter()
            .flat_map(|f| f.iter().flat_map(|i| i.to_le_bytes()))
            .collect();
        w.write_bin(tag, field, "u32", &[data.len(), 3], &bytes)
    }
}

fn rgba_field(w: &mut DocWriter, tag: &str, field: &str, data: &[[f64; 4]]) -> Result<Value> {
    if data.len() * 4 <= SIDECAR_THRESHOLD {
        let rows: Vec<Value> = data.iter().map(|c| f64_row(c)).collect::<Result<_>>()?;
        Ok(Value::Array(rows))
    } else {
        let bytes = f64_bytes(data.iter().flatten().copied())?;
        w.write_bin(tag, field, "f64", &[data.len(), 4], &bytes)
    }
}

fn uv_value(w: &mut DocWriter, tag: &str, uv: &UVMap) -> Result<Value> {
    match uv {
        UVMap::VertexUv(coords) => {
            let values = if coords.len() * 2 <= SIDECAR_THRESHOLD {
                let rows: Vec<Value> = coords.iter().map(|c| f64_row(c)).collect::<Result<_>>()?;
                Value::Array(rows)
            } else {
                let bytes = f64_bytes(coords.iter().flatten().copied())?;
                w.write_bin(tag, "uv", "f64", &[coords.len(), 2], &bytes)?
            };
            Ok(json!({"type": "vertex", "values": values}))
        }
        UVMap::FacesUv(corners) => {
            let values = if corners.len() * 6 <= SIDECAR_THRESHOLD {
                let rows: Vec<Value> = corners
                    .iter()
                    .map(|face| {
                        let cs: Vec<Value> =
                            face.iter().map(|c| f64_row(c)).collect::<Result<_>>()?;
                        Ok(Value::Array(cs))
                    })
                    .collect::<Result<_>>()?;
                Value::Array(rows)
            } else {
                let bytes = f64_bytes(corners.iter().flatten().flatten().copied())?;
                w.write_bin(tag, "uv", "f64", &[corners.len(), 3, 2], &bytes)?
            };
            Ok(json!({"type": "faces", "values": values}))
        }
    }
}

fn rotation_value(q: &UnitQuat) -> Result<Value> {
    let c = q.components();
    Ok(json!({"type": "quaternion", "value": f64_row(&c)?}))
}

fn pose_value(pose: &Pose) -> Result<Value> {
    Ok(json!({
        "position": f64_row(&[pose.position.x, pose.position.y, pose.position.z])?,
        "rotation": rotation_value(&pose.rotation)?,
    }))
}

fn material_value(m: &Material) -> Result<Value> {
    Ok(match m {
        Material::Principled {
            base_modulation,
            metallic,
            roughness,
            specular,
            emission_color,
            emission_strength,
            alpha,
        } => json!({
            "type": "principled",
            "base_modulation": f64_row(base_modulation)?,
            "metallic": fnum(*metallic)?,
            "roughness": fnum(*roughness)?,
            "specular": fnum(*specular)?,
            "emission_color": f64_row(emission_color)?,
            "emission_strength": fnum(*emission_strength)?,
            "alpha": fnum(*alpha)?,
        }),
        Material::Glossy { roughness } => json!({
            "type": "glossy",
            "roughness": fnum(*roughness)?,
        }),
        Material::WireframeOverlay {
            base,
            thickness,
            wire_color,
        } => json!({
            "type": "wireframe_overlay",
            "base": material_value(base)?,
            "thickness": fnum(*thickness)?,
            "wire_color": f64_row(wire_color)?,
        }),
    })
}

fn colors_value(w: &mut DocWriter, tag: &str, colors: &ColorSource) -> Result<Value> {
    Ok(match colors {
        ColorSource::Uniform(rgba) => json!({"type": "uniform", "value": f64_row(rgba)?}),
        ColorSource::PerVertex(list) => json!({
            "type": "per_vertex",
            "values": rgba_field(w, tag, "colors", list)?,
        }),
        ColorSource::Texture { image, uv } => {
            let name = w.sidecar_name(tag, "texture", "png");
            write_png(image, w.dir.join(&name))?;
            json!({
                "type": "texture",
                "image": {"file": name},
                "uv": uv_value(w, tag, uv)?,
            })
        }
        ColorSource::FileTexture { path, uv, .. } => {
            let path = path.to_str().ok_or_else(|| {
                Error::InvalidSettings("file texture path is not valid UTF-8".into())
            })?;
            json!({
                "type": "file_texture",
                "path": path,
                "uv": uv_value(w, tag, uv)?,
            })
        }
    })
}

fn appearance_value(w: &mut DocWriter, tag: &str, a: &Appearance) -> Result<Value> {
    Ok(json!({
        "colors": colors_value(w, tag, &a.colors)?,
        "material": material_value(&a.material)?,
    }))
}

fn face_segments_value(fs: &FaceSegments) -> Result<Value> {
    let ids: Vec<Value> = fs.segment_ids.iter().map(|&i| Value::from(i)).collect();
    let mut materials = Map::new();
    for (id, mat) in &fs.materials {
        materials.insert(id.to_string(), material_value(mat)?);
    }
    Ok(json!({"segment_ids": ids, "materials": materials}))
}

fn mesh_value(w: &mut DocWriter, tag: &str, m: &TriMesh) -> Result<Value> {
    let mut o = Map::new();
    o.insert("kind".into(), "mesh".into());
    o.insert("tag".into(), tag.into());
    o.insert("pose".into(), pose_value(&m.pose)?);
    o.insert("vertices".into(), vec3_field(w, tag, "vertices", &m.vertices)?);
    o.insert("faces".into(), faces_field(w, tag, "faces", &m.faces)?);
    if let Some(normals) = &m.normals {
        o.insert("normals".into(), vec3_field(w, tag, "normals", normals)?);
    }
    o.insert("shadow_catcher".into(), Value::Bool(m.shadow_catcher));
    if let Some(fs) = &m.face_segments {
        o.insert("face_segments".into(), face_segments_value(fs)?);
    }
    o.insert("appearance".into(), appearance_value(w, tag, &m.appearance)?);
    Ok(Value::Object(o))
}

fn pointcloud_value(w: &mut DocWriter, tag: &str, pc: &PointCloud) -> Result<Value> {
    let mut o = Map::new();
    o.insert("kind".into(), "pointcloud".into());
    o.insert("tag".into(), tag.into());
    o.insert("pose".into(), pose_value(&pc.pose)?);
    o.insert("points".into(), vec3_field(w, tag, "points", &pc.points)?);
    if let Some(colors) = &pc.colors {
        let v = match colors {
            PointColors::Uniform(rgba) => json!({"type": "uniform", "value": f64_row(rgba)?}),
            PointColors::PerPoint(list) => json!({
                "type": "per_point",
                "values": rgba_field(w, tag, "colors", list)?,
            }),
        };
        o.insert("colors".into(), v);
    }
    if let Some(normals) = &pc.normals {
        o.insert("normals".into(), vec3_field(w, tag, "normals", normals)?);
    }
    let shape = match pc.point_shape {
        PointShape::Sphere => "sphere",
        PointShape::Cube => "cube",
    };
    o.insert("point_shape".into(), shape.into());
    o.insert("point_radius".into(), fnum(pc.point_radius)?);
    o.insert("emission_strength".into(), fnum(pc.emission_strength)?);
    Ok(Value::Object(o))
}

fn camera_value(c: &Camera) -> Result<Value> {
    let mut o = Map::new();
    match c.kind {
        CameraKind::Perspective { focal_px } => {
            o.insert("kind".into(), "perspective".into());
            o.insert("focal_px".into(), fnum(focal_px)?);
        }
        CameraKind::Orthographic { ortho_scale } => {
            o.insert("kind".into(), "orthographic".into());
            o.insert("ortho_scale".into(), fnum(ortho_scale)?);
        }
    }
    o.insert("width".into(), Value::from(c.width));
    o.insert("height".into(), Value::from(c.height));
    o.insert("pose".into(), pose_value(&c.pose)?);
    Ok(Value::Object(o))
}

fn light_value(tag: &str, light: &Light) -> Result<Value> {
    Ok(match light {
        Light::Background { color, strength } => json!({
            "kind": "background",
            "tag": tag,
            "color": f64_row(color)?,
            "strength": fnum(*strength)?,
        }),
        Light::Point {
            color,
            strength,
            radius,
            cast_shadow,
            pose,
        } => json!({
            "kind": "point",
            "tag": tag,
            "color": f64_row(color)?,
            "strength": fnum(*strength)?,
            "radius": fnum(*radius)?,
            "cast_shadow": cast_shadow,
            "pose": pose_value(pose)?,
        }),
        Light::Directional {
            color,
            strength,
            angular_diameter,
            cast_shadow,
            pose,
        } => json!({
            "kind": "directional",
            "tag": tag,
            "color": f64_row(color)?,
            "strength": fnum(*strength)?,
            "angular_diameter": fnum(*angular_diameter)?,
            "cast_shadow": cast_shadow,
            "pose": pose_value(pose)?,
        }),
        Light::Spot {
            color,
            strength,
            cone_angle,
            blend,
            cast_shadow,
            pose,
        } => json!({
            "kind": "spot",
            "tag": tag,
            "color": f64_row(color)?,
            "strength": fnum(*strength)?,
            "cone_angle": fnum(*cone_angle)?,
            "blend": fnum(*blend)?,
            "cast_shadow": cast_shadow,
            "pose": pose_value(pose)?,
        }),
        Light::Area {
            color,
            strength,
            shape,
            size,
            cast_shadow,
            pose,
        } => json!({
            "kind": "area",
            "tag": tag,
            "color": f64_row(color)?,
            "strength": fnum(*strength)?,
            "shape": match shape { AreaShape::Square => "square", AreaShape::Disc => "disc" },
            "size": fnum(*size)?,
            "cast_shadow": cast_shadow,
            "pose": pose_value(pose)?,
        }),
    })
}

fn settings_value(s: &RenderSettings) -> Result<Value> {
    let mut passes = Vec::new();
    if s.passes.color {
        passes.push("color");
    }
    if s.passes.depth {
        passes.push("depth");
    }
    if s.passes.albedo {
        passes.push("albedo");
    }
    Ok(json!({
        "resolution": [s.resolution.0, s.resolution.1],
        "samples_per_pixel": s.samples_per_pixel,
        "max_bounces": s.max_bounces,
        "seed": s.seed,
        "passes": passes,
    }))
}

fn doc_stem(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into());
    name.strip_suffix(".scene.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name)
        .to_string()
}

fn doc_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Saves a scene as a canonical document, writing sidecar files next to it.
pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = DocWriter {
        dir: doc_dir(path),
        stem: doc_stem(path),
        used_names: BTreeSet::new(),
    };
    let mut renderables = Vec::new();
    for (tag, r) in scene.renderables() {
        renderables.push(match r {
            Renderable::Mesh(m) => mesh_value(&mut w, tag, m)?,
            Renderable::PointCloud(pc) => pointcloud_value(&mut w, tag, pc)?,
        });
    }
    let lights: Vec<Value> = scene
        .lights()
        .map(|(tag, l)| light_value(tag, l))
        .collect::<Result<_>>()?;
    let camera = match scene.camera() {
        Some(c) => camera_value(c)?,
        None => Value::Null,
    };
    let doc = json!({
        "version": DOC_VERSION,
        "settings": settings_value(&scene.settings)?,
        "camera": camera,
        "renderables": renderables,
        "lights": lights,
    });
    fs::write(path, to_canonical_json(&doc))?;
    Ok(())
}

// ---------------------------------------------------------------- loading

struct LoadCx {
    dir: PathBuf,
}

fn schema_err(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn jp(parent: &str, key: impl std::fmt::Display) -> String {
    format!("{parent}/{key}")
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema_err(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema_err(path, "expected an array"))
}

fn check_keys(map: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema_err(&jp(path, key), "unknown key"));
        }
    }
    Ok(())
}

fn required<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| schema_err(path, format!("missing required key `{key}`")))
}

fn get_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| schema_err(path, "expected a number"))
}

fn get_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| schema_err(path, "expected a non-negative integer"))
}

fn get_u32(v: &Value, path: &str) -> Result<u32> {
    let n = get_u64(v, path)?;
    u32::try_from(n).map_err(|_| schema_err(path, "integer does not fit in 32 bits"))
}

fn get_bool(v: &Value, path: &str) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| schema_err(path, "expected a boolean"))
}

fn get_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| schema_err(path, "expected a string"))
}

fn get_f64_array<const K: usize>(v: &Value, path: &str) -> Result<[f64; K]> {
    let items = as_array(v, path)?;
    if items.len() != K {
        return Err(schema_err(path, format!("expected {K} numbers")));
    }
    let mut out = [0.0; K];
    for (i, item) in items.iter().enumerate() {
        out[i] = get_f64(item, &jp(path, i))?;
    }
    Ok(out)
}

fn get_vec3(v: &Value, path: &str) -> Result<Vec3> {
    let [x, y, z] = get_f64_array::<3>(v, path)?;
    Ok(Vec3::new(x, y, z))
}

fn dtype_size(dtype: &str) -> usize {
    match dtype {
        "f64" => 8,
        "u32" => 4,
        _ => 0,
    }
}

fn sidecar_bytes(
    map: &Map<String, Value>,
    cx: &LoadCx,
    path: &str,
    want_dtype: &str,
    want_dims: usize,
) -> Result<(Vec<u8>, Vec<usize>)> {
    check_keys(map, &["file", "dtype", "shape", "digest"], path)?;
    let file = get_str(required(map, "file", path)?, &jp(path, "file"))?;
    let dtype = get_str(required(map, "dtype", path)?, &jp(path, "dtype"))?;
    if dtype != want_dtype {
        return Err(schema_err(
            &jp(path, "dtype"),
            format!("expected dtype `{want_dtype}`, found `{dtype}`"),
        ));
    }
    let shape_path = jp(path, "shape");
    let shape_items = as_array(required(map, "shape", path)?, &shape_path)?;
    if shape_items.len() != want_dims {
        return Err(schema_err(
            &shape_path,
            format!("expected a {want_dims}-dimensional shape"),
        ));
    }
    let mut shape = Vec::with_capacity(want_dims);
    for (i, item) in shape_items.iter().enumerate() {
        shape.push(get_u64(item, &jp(&shape_path, i))? as usize);
    }
    let digest = get_str(required(map, "digest", path)?, &jp(path, "digest"))?;
    let bytes = fs::read(cx.dir.join(file))
        .map_err(|e| Error::Sidecar(file.to_string(), e.to_string()))?;
    if hex_digest(&bytes) != digest.to_ascii_lowercase() {
        return Err(Error::Sidecar(
            file.to_string(),
            "sha-256 digest does not match the stored value".into(),
        ));
    }
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| schema_err(&shape_path, "shape overflows"))?;
    let expected = count
        .checked_mul(dtype_size(dtype))
        .ok_or_else(|| schema_err(&shape_path, "shape overflows"))?;
    if bytes.len() != expected {
        return Err(Error::Sidecar(
            file.to_string(),
            format!("file holds {} bytes but the shape needs {expected}", bytes.len()),
        ));
    }
    Ok((bytes, shape))
}

fn f64s_from_le(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

fn read_vec3s(v: &Value, cx: &LoadCx, path: &str) -> Result<Vec<Vec3>> {
    match v {
        Value::Array(rows) => rows
            .iter()
            .enumerate()
            .map(|(i, r)| get_vec3(r, &jp(path, i)))
            .collect(),
        Value::Object(map) => {
            let (bytes, shape) = sidecar_bytes(map, cx, path, "f64", 2)?;
            if shape[1] != 3 {
                return Err(schema_err(&jp(path, "shape"), "expected shape [n, 3]"));
            }
            let vals = f64s_from_le(&bytes);
            Ok(vals
                .chunks_exact(3)
                .map(|c| Vec3::new(c[0], c[1], c[2]))
                .collect())
        }
        _ => Err(schema_err(path, "expected an array or a sidecar reference")),
    }
}

fn read_faces(v: &Value, cx: &LoadCx, path: &str) -> Result<Vec<[u32; 3]>> {
    match v {
        Value::Array(rows) => {
            let mut out = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                let rp = jp(path, i);
                let items = as_array(row, &rp)?;
                if items.len() != 3 {
                    return Err(schema_err(&rp, "expected 3 vertex indices"));
                }
                let mut f = [0u32; 3];
                for (k, item) in items.iter().enumerate() {
                    f[k] = get_u32(item, &jp(&rp, k))?;
                }
                out.push(f);
            }
            Ok(out)
        }
        Value::Object(map) => {
            let (bytes, shape) = sidecar_bytes(map, cx, path, "u32", 2)?;
            if shape[1] != 3 {
                return Err(schema_err(&jp(path, "shape"), "expected shape [m, 3]"));
            }
            Ok(bytes
                .chunks_exact(12)
                .map(|c| {
                    [
                        u32::from_le_bytes(c[0..4].try_into().unwrap()),
                        u32::from_le_bytes(c[4..8].try_into().unwrap()),
                        u32::from_le_bytes(c[8..12].try_into().unwrap()),
                    ]
                })
                .collect())
        }
        _ => Err(schema_err(path, "expected an array or a sidecar reference")),
    }
}

fn read_rgba_rows(v: &Value, cx: &LoadCx, path: &str) -> Result<Vec<[f64; 4]>> {
    match v {
        Value::Array(rows) => rows
            .iter()
            .enumerate()
            .map(|(i, r)| get_f64_array::<4>(r, &jp(path, i)))
            .collect(),
        Value::Object(map) => {
            let (bytes, shape) = sidecar_bytes(map, cx, path, "f64", 2)?;
            if shape[1] != 4 {
                return Err(schema_err(&jp(path, "shape"), "expected shape [n, 4]"));
            }
            let vals = f64s_from_le(&bytes);
            Ok(vals
                .chunks_exact(4)
                .map(|c| [c[0], c[1], c[2], c[3]])
                .collect())
        }
        _ => Err(schema_err(path, "expected an array or a sidecar reference")),
    }
}

fn read_uv_rows(v: &Value, cx: &LoadCx, path: &str) -> Result<Vec<[f64; 2]>> {
    match v {
        Value::Array(rows) => rows
            .iter()
            .enumerate()
            .map(|(i, r)| get_f64_array::<2>(r, &jp(path, i)))
            .collect(),
        Value::Object(map) => {
            let (bytes, shape) = sidecar_bytes(map, cx, path, "f64", 2)?;
            if shape[1] != 2 {
                return Err(schema_err(&jp(path, "shape"), "expected shape [n, 2]"));
            }
            let vals = f64s_from_le(&bytes);
            Ok(vals.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
        }
        _ => Err(schema_err(path, "expected an array or a sidecar reference")),
    }
}

fn read_faces_uv(v: &Value, cx: &LoadCx, path: &str) -> Result<Vec<[[f64; 2]; 3]>> {
    match v {
        Value::Array(rows) => {
            let mut out = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                let rp = jp(path, i);
                let corners = as_array(row, &rp)?;
                if corners.len() != 3 {
                    return Err(schema_err(&rp, "expected 3 corner UV pairs"));
                }
                let mut face = [[0.0; 2]; 3];
                for (k, c) in corners.iter().enumerate() {
                    face[k] = get_f64_array::<2>(c, &jp(&rp, k))?;
                }
                out.push(face);
            }
            Ok(out)
        }
        Value::Object(map) => {
            let (bytes, shape) = sidecar_bytes(map, cx, path, "f64", 3)?;
            if shape[1] != 3 || shape[2] != 2 {
                return Err(schema_err(&jp(path, "shape"), "expected shape [m, 3, 2]"));
            }
            let vals = f64s_from_le(&bytes);
            Ok(vals
                .chunks_exact(6)
                .map(|c| [[c[0], c[1]], [c[2], c[3]], [c[4], c[5]]])
                .collect())
        }
        _ => Err(schema_err(path, "expected an array or a sidecar reference")),
    }
}

fn parse_rotation(v: &Value, path: &str) -> Result<UnitQuat> {
    let map = as_object(v, path)?;
    check_keys(map, &["type", "value"], path)?;
    let ty = get_str(required(map, "type", path)?, &jp(path, "type"))?;
    let value = required(map, "value", path)?;
    let vpath = jp(path, "value");
    let spec = match ty {
        "quaternion" => {
            let [w, x, y, z] = get_f64_array::<4>(value, &vpath)?;
            return UnitQuat::new(w, x, y, z).map_err(|e| schema_err(&vpath, e.to_string()));
        }
        "axis_angle" => {
            let [x, y, z, angle] = get_f64_array::<4>(value, &vpath)?;
            RotationSpec::AxisAngle {
                axis: Vec3::new(x, y, z),
                angle,
            }
        }
        "euler_xyz" => {
            let [rx, ry, rz] = get_f64_array::<3>(value, &vpath)?;
            RotationSpec::EulerXyz { rx, ry, rz }
        }
        "matrix" => {
            let rows = as_array(value, &vpath)?;
            if rows.len() != 3 {
                return Err(schema_err(&vpath, "expected 3 matrix rows"));
            }
            let r0 = get_f64_array::<3>(&rows[0], &jp(&vpath, 0))?;
            let r1 = get_f64_array::<3>(&rows[1], &jp(&vpath, 1))?;
            let r2 = get_f64_array::<3>(&rows[2], &jp(&vpath, 2))?;
            RotationSpec::Matrix(Mat3::from_rows(r0, r1, r2))
        }
        other => {
            return Err(schema_err(
                &jp(path, "type"),
                format!("unknown rotation type `{other}`"),
            ));
        }
    };
    to_quaternion(&spec).map_err(|e| schema_err(&vpath, e.to_string()))
}

fn parse_pose(v: &Value, path: &str) -> Result<Pose> {
    let map = as_object(v, path)?;
    check_keys(map, &["position", "rotation"], path)?;
    let position = match map.get("position") {
        Some(p) => get_vec3(p, &jp(path, "position"))?,
        None => Vec3::ZERO,
    };
    let rotation = match map.get("rotation") {
        Some(r) => parse_rotation(r, &jp(path, "rotation"))?,
        None => UnitQuat::IDENTITY,
    };
    Ok(Pose::new(position, rotation))
}

fn opt_pose(map: &Map<String, Value>, path: &str) -> Result<Pose> {
    match map.get("pose") {
        Some(v) => parse_pose(v, &jp(path, "pose")),
        None => Ok(Pose::IDENTITY),
    }
}

fn parse_material(v: &Value, path: &str) -> Result<Material> {
    let map = as_object(v, path)?;
    let ty = get_str(required(map, "type", path)?, &jp(path, "type"))?;
    match ty {
        "principled" => {
            check_keys(
                map,
                &[
                    "type",
                    "base_modulation",
                    "metallic",
                    "roughness",
                    "specular",
                    "emission_color",
                    "emission_strength",
                    "alpha",
                ],
                path,
            )?;
            let Material::Principled {
                mut base_modulation,
                mut metallic,
                mut roughness,
                mut specular,
                mut emission_color,
                mut emission_strength,
                mut alpha,
            } = Material::default()
            else {
                unreachable!()
            };
            if let Some(b) = map.get("base_modulation") {
                base_modulation = get_f64_array::<3>(b, &jp(path, "base_modulation"))?;
            }
            if let Some(x) = map.get("metallic") {
                metallic = get_f64(x, &jp(path, "metallic"))?;
            }
            if let Some(x) = map.get("roughness") {
                roughness = get_f64(x, &jp(path, "roughness"))?;
            }
            if let Some(x) = map.get("specular") {
                specular = get_f64(x, &jp(path, "specular"))?;
            }
            if let Some(e) = map.get("emission_color") {
                emission_color = get_f64_array::<3>(e, &jp(path, "emission_color"))?;
            }
            if let Some(x) = map.get("emission_strength") {
                emission_strength = get_f64(x, &jp(path, "emission_strength"))?;
            }
            if let Some(x) = map.get("alpha") {
                alpha = get_f64(x, &jp(path, "alpha"))?;
            }
            Ok(Material::Principled {
                base_modulation,
                metallic,
                roughness,
                specular,
                emission_color,
                emission_strength,
                alpha,
            })
        }
        "glossy" => {
            check_keys(map, &["type", "roughness"], path)?;
            let roughness = get_f64(required(map, "roughness", path)?, &jp(path, "roughness"))?;
            Ok(Material::Glossy { roughness })
        }
        "wireframe_overlay" => {
            check_keys(map, &["type", "base", "thickness", "wire_color"], path)?;
            let base = parse_material(required(map, "base", path)?, &jp(path, "base"))?;
            let thickness = get_f64(required(map, "thickness", path)?, &jp(path, "thickness"))?;
            let wire_color =
                get_f64_array::<3>(required(map, "wire_color", path)?, &jp(path, "wire_color"))?;
            Ok(Material::WireframeOverlay {
                base: Box::new(base),
                thickness,
                wire_color,
            })
        }
        "preset" => {
            check_keys(map, &["type", "name"], path)?;
            let name = get_str(required(map, "name", path)?, &jp(path, "name"))?;
            let preset = match name {
                "metal" => MaterialPreset::Metal,
                "plastic" => MaterialPreset::Plastic,
                other => {
                    return Err(schema_err(
                        &jp(path, "name"),
                        format!("unknown material preset `{other}`"),
                    ));
                }
            };
            Ok(preset.expand())
        }
        other => Err(schema_err(
            &jp(path, "type"),
            format!("unknown material type `{other}`"),
        )),
    }
}

fn parse_uv(v: &Value, cx: &LoadCx, path: &str) -> Result<UVMap> {
    let map = as_object(v, path)?;
    check_keys(map, &["type", "values"], path)?;
    let ty = get_str(required(map, "type", path)?, &jp(path, "type"))?;
    let values = required(map, "values", path)?;
    let vpath = jp(path, "values");
    match ty {
        "vertex" => Ok(UVMap::VertexUv(read_uv_rows(values, cx, &vpath)?)),
        "faces" => Ok(UVMap::FacesUv(read_faces_uv(values, cx, &vpath)?)),
        other => Err(schema_err(
            &jp(path, "type"),
            format!("unknown UV map type `{other}`"),
        )),
    }
}

fn parse_colors(v: &Value, cx: &LoadCx, path: &str) -> Result<ColorSource> {
    let map = as_object(v, path)?;
    let ty = get_str(required(map, "type", path)?, &jp(path, "type"))?;
    match ty {
        "uniform" => {
            check_keys(map, &["type", "value"], path)?;
            let rgba = get_f64_array::<4>(required(map, "value", path)?, &jp(path, "value"))?;
            ColorSource::uniform_rgba(rgba).map_err(|e| schema_err(&jp(path, "value"), e.to_string()))
        }
        "per_vertex" => {
            check_keys(map, &["type", "values"], path)?;
            let rows = read_rgba_rows(required(map, "values", path)?, cx, &jp(path, "values"))?;
            ColorSource::per_vertex_rgba(rows)
                .map_err(|e| schema_err(&jp(path, "values"), e.to_string()))
        }
        "texture" => {
            check_keys(map, &["type", "image", "uv"], path)?;
            let image_map = as_object(required(map, "image", path)?, &jp(path, "image"))?;
            check_keys(image_map, &["file"], &jp(path, "image"))?;
            let file = get_str(
                required(image_map, "file", &jp(path, "image"))?,
                &jp(&jp(path, "image"), "file"),
            )?;
            let image = read_png(cx.dir.join(file)).map_err(|e| match e {
                Error::Io(io) => Error::Sidecar(file.to_string(), io.to_string()),
                other => other,
            })?;
            let uv = parse_uv(required(map, "uv", path)?, cx, &jp(path, "uv"))?;
            ColorSource::texture(image, uv).map_err(|e| schema_err(path, e.to_string()))
        }
        "file_texture" => {
            check_keys(map, &["type", "path", "uv"], path)?;
            let tex_path = get_str(required(map, "path", path)?, &jp(path, "path"))?;
            let uv = parse_uv(required(map, "uv", path)?, cx, &jp(path, "uv"))?;
            ColorSource::file_texture(tex_path, uv).map_err(|e| schema_err(path, e.to_string()))
        }
        other => Err(schema_err(
            &jp(path, "type"),
            format!("unknown color source type `{other}`"),
        )),
    }
}

fn parse_appearance(v: &Value, cx: &LoadCx, path: &str) -> Result<Appearance> {
    let map = as_object(v, path)?;
    check_keys(map, &["colors", "material"], path)?;
    let mut appearance = Appearance::default();
    if let Some(c) = map.get("colors") {
        appearance.colors = parse_colors(c, cx, &jp(path, "colors"))?;
    }
    if let Some(m) = map.get("material") {
        appearance.material = parse_material(m, &jp(path, "material"))?;
    }
    Ok(appearance)
}

fn parse_face_segments(v: &Value, path: &str) -> Result<FaceSegments> {
    let map = as_object(v, path)?;
    check_keys(map, &["segment_ids", "materials"], path)?;
    let ids_path = jp(path, "segment_ids");
    let ids = as_array(required(map, "segment_ids", path)?, &ids_path)?
        .iter()
        .enumerate()
        .map(|(i, v)| get_u32(v, &jp(&ids_path, i)))
        .collect::<Result<Vec<u32>>>()?;
    let mats_path = jp(path, "materials");
    let mats_map = as_object(required(map, "materials", path)?, &mats_path)?;
    let mut materials = BTreeMap::new();
    for (key, mat) in mats_map {
        let id: u32 = key
            .parse()
            .map_err(|_| schema_err(&jp(&mats_path, key), "segment id is not an integer"))?;
        materials.insert(id, parse_material(mat, &jp(&mats_path, key))?);
    }
    Ok(FaceSegments {
        segment_ids: ids,
        materials,
    })
}

fn parse_mesh(map: &Map<String, Value>, cx: &LoadCx, path: &str) -> Result<TriMesh> {
    check_keys(
        map,
        &[
            "kind",
            "tag",
            "pose",
            "vertices",
            "faces",
            "normals",
            "shadow_catcher",
            "face_segments",
            "appearance",
        ],
        path,
    )?;
    let vertices = read_vec3s(required(map, "vertices", path)?, cx, &jp(path, "vertices"))?;
    let faces = read_faces(required(map, "faces", path)?, cx, &jp(path, "faces"))?;
    let normals = match map.get("normals") {
        Some(v) => Some(read_vec3s(v, cx, &jp(path, "normals"))?),
        None => None,
    };
    let shadow_catcher = match map.get("shadow_catcher") {
        Some(v) => get_bool(v, &jp(path, "shadow_catcher"))?,
        None => false,
    };
    let face_segments = match map.get("face_segments") {
        Some(v) => Some(parse_face_segments(v, &jp(path, "face_segments"))?),
        None => None,
    };
    let appearance = match map.get("appearance") {
        Some(v) => parse_appearance(v, cx, &jp(path, "appearance"))?,
        None => Appearance::default(),
    };
    Ok(TriMesh {
        vertices,
        faces,
        normals,
        appearance,
        face_segments,
        shadow_catcher,
        pose: opt_pose(map, path)?,
    })
}

fn parse_pointcloud(map: &Map<String, Value>, cx: &LoadCx, path: &str) -> Result<PointCloud> {
    check_keys(
        map,
        &[
            "kind",
            "tag",
            "pose",
            "points",
            "colors",
            "normals",
            "point_shape",
            "point_radius",
            "emission_strength",
        ],
        path,
    )?;
    let points = read_vec3s(required(map, "points", path)?, cx, &jp(path, "points"))?;
    let mut pc = PointCloud::new(points);
    if let Some(v) = map.get("colors") {
        let cpath = jp(path, "colors");
        let cmap = as_object(v, &cpath)?;
        let ty = get_str(required(cmap, "type", &cpath)?, &jp(&cpath, "type"))?;
        pc.colors = Some(match ty {
            "uniform" => {
                check_keys(cmap, &["type", "value"], &cpath)?;
                PointColors::Uniform(get_f64_array::<4>(
                    required(cmap, "value", &cpath)?,
                    &jp(&cpath, "value"),
                )?)
            }
            "per_point" => {
                check_keys(cmap, &["type", "values"], &cpath)?;
                PointColors::PerPoint(read_rgba_rows(
                    required(cmap, "values", &cpath)?,
                    cx,
                    &jp(&cpath, "values"),
                )?)
            }
            other => {
                return Err(schema_err(
                    &jp(&cpath, "type"),
                    format!("unknown point color type `{other}`"),
                ));
            }
        });
    }
    if let Some(v) = map.get("normals") {
        pc.normals = Some(read_vec3s(v, cx, &jp(path, "normals"))?);
    }
    if let Some(v) = map.get("point_shape") {
        let spath = jp(path, "point_shape");
        pc.point_shape = match get_str(v, &spath)? {
            "sphere" => PointShape::Sphere,
            "cube" => PointShape::Cube,
            other => {
                return Err(schema_err(&spath, format!("unknown point shape `{other}`")));
            }
        };
    }
    if let Some(v) = map.get("point_radius") {
        pc.point_radius = get_f64(v, &jp(path, "point_radius"))?;
    }
    if let Some(v) = map.get("emission_strength") {
        pc.emission_strength = get_f64(v, &jp(path, "emission_strength"))?;
    }
    pc.pose = opt_pose(map, path)?;
    Ok(pc)
}

fn parse_tag<'a>(map: &'a Map<String, Value>, path: &str) -> Result<Option<&'a str>> {
    match map.get("tag") {
        Some(v) => Ok(Some(get_str(v, &jp(path, "tag"))?)),
        None => Ok(None),
    }
}

fn parse_renderable(v: &Value, cx: &LoadCx, path: &str) -> Result<(Option<String>, Renderable)> {
    let map = as_object(v, path)?;
    let kind = get_str(required(map, "kind", path)?, &jp(path, "kind"))?;
    let tag = parse_tag(map, path)?.map(str::to_string);
    let renderable = match kind {
        "mesh" => Renderable::Mesh(parse_mesh(map, cx, path)?),
        "pointcloud" => Renderable::PointCloud(parse_pointcloud(map, cx, path)?),
        other => {
            return Err(schema_err(
                &jp(path, "kind"),
                format!("unknown renderable kind `{other}`"),
            ));
        }
    };
    Ok((tag, renderable))
}

fn req_f64(map: &Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    get_f64(required(map, key, path)?, &jp(path, key))
}

fn opt_f64(map: &Map<String, Value>, key: &str, path: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        Some(v) => get_f64(v, &jp(path, key)),
        None => Ok(default),
    }
}

fn opt_bool(map: &Map<String, Value>, key: &str, path: &str, default: bool) -> Result<bool> {
    match map.get(key) {
        Some(v) => get_bool(v, &jp(path, key)),
        None => Ok(default),
    }
}

fn parse_light(v: &Value, path: &str) -> Result<(Option<String>, Light)> {
    let map = as_object(v, path)?;
    let kind = get_str(required(map, "kind", path)?, &jp(path, "kind"))?;
    let tag = parse_tag(map, path)?.map(str::to_string);
    let color_of = |map: &Map<String, Value>| -> Result<[f64; 3]> {
        get_f64_array::<3>(required(map, "color", path)?, &jp(path, "color"))
    };
    let light = match kind {
        "background" => {
            check_keys(map, &["kind", "tag", "color", "strength"], path)?;
            Light::Background {
                color: color_of(map)?,
                strength: req_f64(map, "strength", path)?,
            }
        }
        "point" => {
            check_keys(
                map,
                &["kind", "tag", "color", "strength", "radius", "cast_shadow", "pose"],
                path,
            )?;
            Light::Point {
                color: color_of(map)?,
                strength: req_f64(map, "strength", path)?,
                radius: opt_f64(map, "radius", path, 0.0)?,
                cast_shadow: opt_bool(map, "cast_shadow", path, true)?,
                pose: opt_pose(map, path)?,
            }
        }
        "directional" => {
            check_keys(
                map,
                &[
                    "kind",
                    "tag",
                    "color",
                    "strength",
                    "angular_diameter",
                    "cast_shadow",
                    "pose",
                ],
                path,
            )?;
            Light::Directional {
                color: color_of(map)?,
                strength: req_f64(map, "strength", path)?,
                angular_diameter: opt_f64(map, "angular_diameter", path, 0.0)?,
                cast_shadow: opt_bool(map, "cast_shadow", path, true)?,
                pose: opt_pose(map, path)?,
            }
        }
        "spot" => {
            check_keys(
                map,
                &[
                    "kind",
                    "tag",
                    "color",
                    "strength",
                    "cone_angle",
                    "blend",
                    "cast_shadow",
                    "pose",
                ],
                path,
            )?;
            Light::Spot {
                color: color_of(map)?,
                strength: req_f64(map, "strength", path)?,
                cone_angle: req_f64(map, "cone_angle", path)?,
                blend: opt_f64(map, "blend", path, 0.0)?,
                cast_shadow: opt_bool(map, "cast_shadow", path, true)?,
                pose: opt_pose(map, path)?,
            }
        }
        "area" => {
            check_keys(
                map,
                &["kind", "tag", "color", "strength", "shape", "size", "cast_shadow", "pose"],
                path,
            )?;
            let spath = jp(path, "shape");
            let shape = match get_str(required(map, "shape", path)?, &spath)? {
                "square" => AreaShape::Square,
                "disc" => AreaShape::Disc,
                other => {
                    return Err(schema_err(&spath, format!("unknown area shape `{other}`")));
                }
            };
            Light::Area {
                color: color_of(map)?,
                strength: req_f64(map, "strength", path)?,
                shape,
                size: req_f64(map, "size", path)?,
                cast_shadow: opt_bool(map, "cast_shadow", path, true)?,
                pose: opt_pose(map, path)?,
            }
        }
        other => {
            return Err(schema_err(
                &jp(path, "kind"),
                format!("unknown light kind `{other}`"),
            ));
        }
    };
    Ok((tag, light))
}

fn parse_camera(v: &Value, path: &str) -> Result<Camera> {
    let map = as_object(v, path)?;
    check_keys(
        map,
        &["kind", "width", "height", "focal_px", "ortho_scale", "pose"],
        path,
    )?;
    let kind = get_str(required(map, "kind", path)?, &jp(path, "kind"))?;
    let width = get_u32(required(map, "width", path)?, &jp(path, "width"))?;
    let height = get_u32(required(map, "height", path)?, &jp(path, "height"))?;
    let pose = opt_pose(map, path)?;
    match kind {
        "perspective" => {
            if map.contains_key("ortho_scale") {
                return Err(schema_err(
                    &jp(path, "ortho_scale"),
                    "not allowed for a perspective camera",
                ));
            }
            let focal = req_f64(map, "focal_px", path)?;
            Camera::perspective_focal(focal, width, height, pose)
                .map_err(|e| schema_err(path, e.to_string()))
        }
        "orthographic" => {
            if map.contains_key("focal_px") {
                return Err(schema_err(
                    &jp(path, "focal_px"),
                    "not allowed for an orthographic camera",
                ));
            }
            let scale = req_f64(map, "ortho_scale", path)?;
            Camera::orthographic(scale, width, height, pose)
                .map_err(|e| schema_err(path, e.to_string()))
        }
        other => Err(schema_err(
            &jp(path, "kind"),
            format!("unknown camera kind `{other}`"),
        )),
    }
}

fn parse_settings(v: &Value, path: &str) -> Result<RenderSettings> {
    let map = as_object(v, path)?;
    check_keys(
        map,
        &["resolution", "samples_per_pixel", "max_bounces", "seed", "passes"],
        path,
    )?;
    let mut settings = RenderSettings::default();
    if let Some(r) = map.get("resolution") {
        let rpath = jp(path, "resolution");
        let items = as_array(r, &rpath)?;
        if items.len() != 2 {
            return Err(schema_err(&rpath, "expected [width, height]"));
        }
        settings.resolution = (get_u32(&items[0], &jp(&rpath, 0))?, get_u32(&items[1], &jp(&rpath, 1))?);
    }
    if let Some(v) = map.get("samples_per_pixel") {
        settings.samples_per_pixel = get_u32(v, &jp(path, "samples_per_pixel"))?;
    }
    if let Some(v) = map.get("max_bounces") {
        settings.max_bounces = get_u32(v, &jp(path, "max_bounces"))?;
    }
    if let Some(v) = map.get("seed") {
        settings.seed = get_u64(v, &jp(path, "seed"))?;
    }
    if let Some(v) = map.get("passes") {
        let ppath = jp(path, "passes");
        settings.passes.color = false;
        settings.passes.depth = false;
        settings.passes.albedo = false;
        for (i, item) in as_array(v, &ppath)?.iter().enumerate() {
            match get_str(item, &jp(&ppath, i))? {
                "color" => settings.passes.color = true,
                "depth" => settings.passes.depth = true,
                "albedo" => settings.passes.albedo = true,
                other => {
                    return Err(schema_err(
                        &jp(&ppath, i),
                        format!("unknown pass `{other}`"),
                    ));
                }
            }
        }
    }
    settings.validate().map_err(|e| schema_err(path, e.to_string()))?;
    Ok(settings)
}

fn parse_version(map: &Map<String, Value>, path: &str) -> Result<()> {
    let v = get_u64(required(map, "version", path)?, &jp(path, "version"))?;
    if v != DOC_VERSION {
        return Err(schema_err(
            &jp(path, "version"),
            format!("unsupported document version {v} (expected {DOC_VERSION})"),
        ));
    }
    Ok(())
}

fn read_document(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads a scene document, resolving sidecar references next to the file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let value = read_document(path)?;
    let cx = LoadCx {
        dir: doc_dir(path).to_path_buf(),
    };
    let map = as_object(&value, "")?;
    check_keys(
        map,
        &["version", "settings", "camera", "renderables", "lights"],
        "",
    )?;
    parse_version(map, "")?;
    let mut scene = Scene::new();
    if let Some(s) = map.get("settings") {
        scene.settings = parse_settings(s, "/settings")?;
    }
    if let Some(c) = map.get("camera") {
        if !c.is_null() {
            let camera = parse_camera(c, "/camera")?;
            scene
                .set_camera(camera)
                .map_err(|e| schema_err("/camera", e.to_string()))?;
        }
    }
    if let Some(r) = map.get("renderables") {
        for (i, item) in as_array(r, "/renderables")?.iter().enumerate() {
            let path = jp("/renderables", i);
            let (tag, renderable) = parse_renderable(item, &cx, &path)?;
            scene
                .add_renderable(renderable, tag.as_deref())
                .map_err(|e| schema_err(&path, e.to_string()))?;
        }
    }
    if let Some(l) = map.get("lights") {
        for (i, item) in as_array(l, "/lights")?.iter().enumerate() {
            let path = jp("/lights", i);
            let (tag, light) = parse_light(item, &path)?;
            scene
                .add_light(light, tag.as_deref())
                .map_err(|e| schema_err(&path, e.to_string()))?;
        }
    }
    Ok(scene)
}

// ------------------------------------------------- keypoint and frame docs

/// Saves trajectory keypoints as a canonical document.
pub fn save_keypoints(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let keypoints: Vec<Value> = traj
        .keypoints()
        .iter()
        .map(|kp| {
            Ok(json!({
                "time": fnum(kp.time)?,
                "position": f64_row(&[kp.position.x, kp.position.y, kp.position.z])?,
                "rotation": rotation_value(&kp.rotation)?,
            }))
        })
        .collect::<Result<_>>()?;
    let doc = json!({"version": DOC_VERSION, "keypoints": keypoints});
    fs::write(path, to_canonical_json(&doc))?;
    Ok(())
}

/// Loads a keypoint document into a trajectory.
pub fn load_keypoints(path: impl AsRef<Path>) -> Result<Trajectory> {
    let value = read_document(path.as_ref())?;
    let map = as_object(&value, "")?;
    check_keys(map, &["version", "keypoints"], "")?;
    parse_version(map, "")?;
    let mut traj = Trajectory::new();
    let items = as_array(required(map, "keypoints", "")?, "/keypoints")?;
    for (i, item) in items.iter().enumerate() {
        let path = jp("/keypoints", i);
        let kmap = as_object(item, &path)?;
        check_keys(kmap, &["time", "position", "rotation"], &path)?;
        let time = req_f64(kmap, "time", &path)?;
        let position = get_vec3(required(kmap, "position", &path)?, &jp(&path, "position"))?;
        let rotation = match kmap.get("rotation") {
            Some(r) => parse_rotation(r, &jp(&path, "rotation"))?,
            None => UnitQuat::IDENTITY,
        };
        traj.add_keypoint(Keypoint {
            time,
            position,
            rotation,
        })
        .map_err(|e| schema_err(&path, e.to_string()))?;
    }
    Ok(traj)
}

/// Saves per-frame poses as a canonical document.
pub fn save_frames(frames: &[(f64, Pose)], path: impl AsRef<Path>) -> Result<()> {
    let items: Vec<Value> = frames
        .iter()
        .map(|(time, pose)| {
            Ok(json!({
                "time": fnum(*time)?,
                "position": f64_row(&[pose.position.x, pose.position.y, pose.position.z])?,
                "rotation": rotation_value(&pose.rotation)?,
            }))
        })
        .collect::<Result<_>>()?;
    let doc = json!({"version": DOC_VERSION, "frames": items});
    fs::write(path, to_canonical_json(&doc))?;
    Ok(())
}

/// Loads a frame document back into (time, pose) pairs.
pub fn load_frames(path: impl AsRef<Path>) -> Result<Vec<(f64, Pose)>> {
    let value = read_document(path.as_ref())?;
    let map = as_object(&value, "")?;
    check_keys(map, &["version", "frames"], "")?;
    parse_version(map, "")?;
    let items = as_array(required(map, "frames", "")?, "/frames")?;
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = jp("/frames", i);
        let fmap = as_object(item, &path)?;
        check_keys(fmap, &["time", "position", "rotation"], &path)?;
        let time = req_f64(fmap, "time", &path)?;
        let position = get_vec3(required(fmap, "position", &path)?, &jp(&path, "position"))?;
        let rotation = match fmap.get("rotation") {
            Some(r) => parse_rotation(r, &jp(&path, "rotation"))?,
            None => UnitQuat::IDENTITY,
        };
        out.push((time, Pose::new(position, rotation)));
    }
    Ok(out)
}
