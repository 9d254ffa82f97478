//! PLY point clouds and meshes, ascii and binary-little-endian.
//!
//! Vertices need `x`, `y`, `z`; `nx`, `ny`, `nz` become normals and uchar
//! `red`, `green`, `blue` (plus optional `alpha`) become colors mapped to
//! [0, 1]. A `face` element turns the file into a mesh, with polygons fan
//! triangulated. Unknown properties and elements are skipped. Big-endian
//! files are rejected.

use std::fs;
use std::path::Path;

use crate::appearance::ColorSource;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::renderable::{PointCloud, PointColors, TriMesh};

/// Payload of a PLY file: a bare point cloud or a triangle mesh.
#[derive(Debug, Clone)]
pub enum PlyData {
    Points(PointCloud),
    Mesh(TriMesh),
}

/// On-disk encoding used when saving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

fn parse_err(file: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.display().to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------- writing

fn color_byte(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

struct VertexPayload<'a> {
    points: &'a [Vec3],
    normals: Option<&'a [Vec3]>,
    colors: Option<Vec<[u8; 4]>>,
}

fn header(payload: &VertexPayload, faces: Option<usize>, format: PlyFormat) -> String {
    let mut h = String::from("ply\n");
    h.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    h.push_str(&format!("element vertex {}\n", payload.points.len()));
    h.push_str("property float x\nproperty float y\nproperty float z\n");
    if payload.normals.is_some() {
        h.push_str("property float nx\nproperty float ny\nproperty float nz\n");
    }
    if payload.colors.is_some() {
        h.push_str(
            "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n",
        );
    }
    if let Some(n) = faces {
        h.push_str(&format!("element face {n}\n"));
        h.push_str("property list uchar int vertex_indices\n");
    }
    h.push_str("end_header\n");
    h
}

fn write_body(
    out: &mut Vec<u8>,
    payload: &VertexPayload,
    faces: Option<&[[u32; 3]]>,
    format: PlyFormat,
) {
    for (i, p) in payload.points.iter().enumerate() {
        let mut floats = vec![p.x as f32, p.y as f32, p.z as f32];
        if let Some(normals) = payload.normals {
            let n = normals[i];
            floats.extend([n.x as f32, n.y as f32, n.z as f32]);
        }
        match format {
            PlyFormat::Ascii => {
                let mut line: Vec<String> = floats.iter().map(|f| f.to_string()).collect();
                if let Some(colors) = &payload.colors {
                    line.extend(colors[i].iter().map(|b| b.to_string()));
                }
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
            PlyFormat::BinaryLittleEndian => {
                for f in floats {
                    out.extend_from_slice(&f.to_le_bytes());
                }
                if let Some(colors) = &payload.colors {
                    out.extend_from_slice(&colors[i]);
                }
            }
        }
    }
    if let Some(faces) = faces {
        for f in faces {
            match format {
                PlyFormat::Ascii => {
                    out.extend_from_slice(format!("3 {} {} {}\n", f[0], f[1], f[2]).as_bytes());
                }
                PlyFormat::BinaryLittleEndian => {
                    out.push(3);
                    for &i in f {
                        out.extend_from_slice(&(i as i32).to_le_bytes());
                    }
                }
            }
        }
    }
}

/// Saves a point cloud or mesh as PLY. Coordinates are stored as f32 and
/// colors as uchar.
pub fn save_ply(data: &PlyData, format: PlyFormat, path: impl AsRef<Path>) -> Result<()> {
    let (payload, faces) = match data {
        PlyData::Points(pc) => {
            let colors = pc.colors.as_ref().map(|c| match c {
                PointColors::Uniform(rgba) => vec![rgba.map(color_byte); pc.points.len()],
                PointColors::PerPoint(list) => list.iter().map(|c| c.map(color_byte)).collect(),
            });
            (
                VertexPayload {
                    points: &pc.points,
                    normals: pc.normals.as_deref(),
                    colors,
                },
                None,
            )
        }
        PlyData::Mesh(mesh) => {
            let colors = match &mesh.appearance.colors {
                ColorSource::PerVertex(list) => {
                    Some(list.iter().map(|c| c.map(color_byte)).collect())
                }
                _ => None,
            };
            (
                VertexPayload {
                    points: &mesh.vertices,
                    normals: mesh.normals.as_deref(),
                    colors,
                },
                Some(mesh.faces.as_slice()),
            )
        }
    };
    let mut out = header(&payload, faces.map(<[_]>::len), format).into_bytes();
    write_body(&mut out, &payload, faces, format);
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------- loading

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn from_name(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
        _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { ty: Scalar, name: String },
    List { count: Scalar, item: Scalar, name: String },
}

#[derive(Debug, Clone)]
struct ElementDecl {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: PlyFormat,
    elements: Vec<ElementDecl>,
}

fn parse_header(file: &Path, text: &str) -> Result<Header> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(parse_err(file, "missing `ply` magic line"));
    }
    let mut format = None;
    let mut elements: Vec<ElementDecl> = Vec::new();
    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                format = Some(match *fmt {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    "binary_big_endian" => {
                        return Err(parse_err(file, "big-endian PLY files are not supported"));
                    }
                    other => {
                        return Err(parse_err(file, format!("unknown PLY format `{other}`")));
                    }
                });
            }
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| parse_err(file, format!("bad element count `{count}`")))?;
                elements.push(ElementDecl {
                    name: (*name).to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_ty, item_ty, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(file, "property before any element"))?;
                let count = Scalar::from_name(count_ty).ok_or_else(|| {
                    parse_err(file, format!("unknown property type `{count_ty}`"))
                })?;
                let item = Scalar::from_name(item_ty)
                    .ok_or_else(|| parse_err(file, format!("unknown property type `{item_ty}`")))?;
                element.properties.push(Property::List {
                    count,
                    item,
                    name: (*name).to_string(),
                });
            }
            ["property", ty, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(file, "property before any element"))?;
                let ty = Scalar::from_name(ty)
                    .ok_or_else(|| parse_err(file, format!("unknown property type `{ty}`")))?;
                element.properties.push(Property::Scalar {
                    ty,
                    name: (*name).to_string(),
                });
            }
            _ => {
                return Err(parse_err(file, format!("bad header line `{}`", line.trim())));
            }
        }
    }
    let format = format.ok_or_else(|| parse_err(file, "missing `format` line"))?;
    Ok(Header { format, elements })
}

enum Body<'a> {
    Ascii(std::str::SplitWhitespace<'a>),
    Binary(&'a [u8]),
}

impl Body<'_> {
    fn scalar(&mut self, ty: Scalar, file: &Path) -> Result<f64> {
        match self {
            Body::Ascii(tokens) => {
                let tok = tokens
                    .next()
                    .ok_or_else(|| parse_err(file, "unexpected end of file"))?;
                tok.parse::<f64>()
                    .map_err(|_| parse_err(file, format!("bad number `{tok}`")))
            }
            Body::Binary(bytes) => {
                let n = ty.size();
                if bytes.len() < n {
                    return Err(parse_err(file, "unexpected end of file"));
                }
                let (head, rest) = bytes.split_at(n);
                *bytes = rest;
                Ok(match ty {
                    Scalar::I8 => head[0] as i8 as f64,
                    Scalar::U8 => head[0] as f64,
                    Scalar::I16 => i16::from_le_bytes(head.try_into().unwrap()) as f64,
                    Scalar::U16 => u16::from_le_bytes(head.try_into().unwrap()) as f64,
                    Scalar::I32 => i32::from_le_bytes(head.try_into().unwrap()) as f64,
                    Scalar::U32 => u32::from_le_bytes(head.try_into().unwrap()) as f64,
                    Scalar::F32 => f32::from_le_bytes(head.try_into().unwrap()) as f64,
                    Scalar::F64 => f64::from_le_bytes(head.try_into().unwrap()),
                })
            }
        }
    }

    fn list(&mut self, count: Scalar, item: Scalar, file: &Path) -> Result<Vec<f64>> {
        let n = self.scalar(count, file)?;
        if !(0.0..=1e7).contains(&n) || n.fract() != 0.0 {
            return Err(parse_err(file, format!("bad list count {n}")));
        }
        let mut out = Vec::with_capacity(n as usize);
        for _ in 0..n as usize {
            out.push(self.scalar(item, file)?);
        }
        Ok(out)
    }
}

struct VertexColumns {
    xyz: [usize; 3],
    normal: Option<[usize; 3]>,
    color: Option<[usize; 3]>,
    alpha: Option<usize>,
}

fn vertex_columns(file: &Path, decl: &ElementDecl) -> Result<VertexColumns> {
    let find = |name: &str| {
        decl.properties.iter().position(|p| match p {
            Property::Scalar { name: n, .. } => n == name,
            Property::List { name: n, .. } => n == name,
        })
    };
    let coord = |name: &str| {
        find(name).ok_or_else(|| parse_err(file, format!("vertex element lacks `{name}`")))
    };
    let xyz = [coord("x")?, coord("y")?, coord("z")?];
    let normal = match (find("nx"), find("ny"), find("nz")) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        _ => None,
    };
    let color = match (find("red"), find("green"), find("blue")) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        _ => None,
    };
    if let Some(cols) = color {
        for &i in cols.iter().chain(find("alpha").iter()) {
            match decl.properties[i] {
                Property::Scalar { ty: Scalar::U8, .. } => {}
                _ => return Err(parse_err(file, "color properties must be uchar")),
            }
        }
    }
    Ok(VertexColumns {
        xyz,
        normal,
        color,
        alpha: find("alpha"),
    })
}

struct VertexData {
    points: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    colors: Option<Vec<[f64; 4]>>,
}

fn read_vertices(
    file: &Path,
    decl: &ElementDecl,
    body: &mut Body,
) -> Result<VertexData> {
    let cols = vertex_columns(file, decl)?;
    let mut points = Vec::with_capacity(decl.count.min(1 << 20));
    let mut normals = cols.normal.map(|_| Vec::new());
    let mut colors = cols.color.map(|_| Vec::new());
    let mut row = vec![0.0f64; decl.properties.len()];
    for _ in 0..decl.count {
        for (slot, prop) in row.iter_mut().zip(&decl.properties) {
            *slot = match prop {
                Property::Scalar { ty, .. } => body.scalar(*ty, file)?,
                Property::List { count, item, .. } => {
                    body.list(*count, *item, file)?;
                    0.0
                }
            };
        }
        points.push(Vec3::new(row[cols.xyz[0]], row[cols.xyz[1]], row[cols.xyz[2]]));
        if let (Some(ns), Some([a, b, c])) = (&mut normals, cols.normal) {
            ns.push(Vec3::new(row[a], row[b], row[c]));
        }
        if let (Some(cs), Some([r, g, b])) = (&mut colors, cols.color) {
            let alpha = cols.alpha.map_or(255.0, |i| row[i]);
            cs.push([row[r] / 255.0, row[g] / 255.0, row[b] / 255.0, alpha / 255.0]);
        }
    }
    Ok(VertexData {
        points,
        normals,
        colors,
    })
}

fn read_faces(
    file: &Path,
    decl: &ElementDecl,
    body: &mut Body,
    vertex_count: usize,
) -> Result<Vec<[u32; 3]>> {
    let mut faces = Vec::new();
    for _ in 0..decl.count {
        let mut polygon: Option<Vec<u32>> = None;
        for prop in &decl.properties {
            match prop {
                Property::Scalar { ty, .. } => {
                    body.scalar(*ty, file)?;
                }
                Property::List { count, item, name } => {
                    let values = body.list(*count, *item, file)?;
                    if name == "vertex_indices" || name == "vertex_index" {
                        let mut ids = Vec::with_capacity(values.len());
                        for v in values {
                            if v < 0.0 || v.fract() != 0.0 || v >= vertex_count as f64 {
                                return Err(parse_err(
                                    file,
                                    format!("face index {v} out of range"),
                                ));
                            }
                            ids.push(v as u32);
                        }
                        polygon = Some(ids);
                    }
                }
            }
        }
        let polygon =
            polygon.ok_or_else(|| parse_err(file, "face element lacks `vertex_indices`"))?;
        if polygon.len() < 3 {
            return Err(parse_err(file, "face with fewer than 3 vertices"));
        }
        for i in 1..polygon.len() - 1 {
            faces.push([polygon[0], polygon[i], polygon[i + 1]]);
        }
    }
    Ok(faces)
}

fn skip_element(file: &Path, decl: &ElementDecl, body: &mut Body) -> Result<()> {
    for _ in 0..decl.count {
        for prop in &decl.properties {
            match prop {
                Property::Scalar { ty, .. } => {
                    body.scalar(*ty, file)?;
                }
                Property::List { count, item, .. } => {
                    body.list(*count, *item, file)?;
                }
            }
        }
    }
    Ok(())
}

/// Loads a PLY file as a point cloud, or as a mesh when a face element is
/// present.
pub fn load_ply(path: impl AsRef<Path>) -> Result<PlyData> {
    let file = path.as_ref();
    let bytes = fs::read(file)?;
    let marker = b"end_header";
    let header_end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| parse_err(file, "missing `end_header`"))?;
    let mut body_start = header_end + marker.len();
    while body_start < bytes.len() && (bytes[body_start] == b'\r' || bytes[body_start] == b'\n') {
        body_start += 1;
        if bytes[body_start - 1] == b'\n' {
            break;
        }
    }
    let header_text = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| parse_err(file, "header is not valid UTF-8"))?;
    let header = parse_header(file, header_text)?;

    let ascii_text;
    let mut body = match header.format {
        PlyFormat::Ascii => {
            ascii_text = std::str::from_utf8(&bytes[body_start..])
                .map_err(|_| parse_err(file, "ascii body is not valid UTF-8"))?;
            Body::Ascii(ascii_text.split_whitespace())
        }
        PlyFormat::BinaryLittleEndian => Body::Binary(&bytes[body_start..]),
    };

    let mut vertices: Option<VertexData> = None;
    let mut faces: Option<Vec<[u32; 3]>> = None;
    for decl in &header.elements {
        match decl.name.as_str() {
            "vertex" => vertices = Some(read_vertices(file, decl, &mut body)?),
            "face" => {
                let count = vertices
                    .as_ref()
                    .map(|v| v.points.len())
                    .ok_or_else(|| parse_err(file, "face element before vertex element"))?;
                faces = Some(read_faces(file, decl, &mut body, count)?);
            }
            _ => skip_element(file, decl, &mut body)?,
        }
    }
    let data = vertices.ok_or_else(|| parse_err(file, "missing vertex element"))?;

    match faces {
        Some(faces) => {
            let mut mesh = TriMesh::new(data.points, faces)?;
            if let Some(normals) = data.normals {
                mesh = mesh.with_normals(normals)?;
            }
            if let Some(colors) = data.colors {
                mesh.appearance.colors = ColorSource::per_vertex_rgba(colors)?;
            }
            Ok(PlyData::Mesh(mesh))
        }
        None => {
            let mut pc = PointCloud::new(data.points);
            pc.normals = data.normals;
            pc.colors = data.colors.map(PointColors::PerPoint);
            pc.validate()?;
            Ok(PlyData::Points(pc))
        }
    }
}
