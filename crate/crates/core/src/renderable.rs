//! Geometry objects: triangle meshes, point clouds, and tessellated
//! primitives.

use std::collections::BTreeMap;

use crate::appearance::{Appearance, Material};
use crate::error::{Error, Result};
use crate::math::{Pose, Vec3};

/// Per-face material overrides: a segment id for every face plus a table
/// mapping segment ids to materials.
#[derive(Debug, Clone)]
pub struct FaceSegments {
    pub segment_ids: Vec<u32>,
    pub materials: BTreeMap<u32, Material>,
}

/// Indexed triangle mesh.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// Optional per-vertex unit normals; faces fall back to geometric
    /// normals when absent.
    pub normals: Option<Vec<Vec3>>,
    pub appearance: Appearance,
    pub face_segments: Option<FaceSegments>,
    /// Renders as a shadow catcher: only shadows cast onto it reach the
    /// output, composited over the background.
    pub shadow_catcher: bool,
    pub pose: Pose,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = TriMesh {
            vertices,
            faces,
            normals: None,
            appearance: Appearance::default(),
            face_segments: None,
            shadow_catcher: false,
            pose: Pose::IDENTITY,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self> {
        self.normals = Some(normals);
        self.validate()?;
        Ok(self)
    }

    pub fn with_appearance(mut self, appearance: Appearance) -> Result<Self> {
        self.appearance = appearance;
        self.validate()?;
        Ok(self)
    }

    pub fn with_face_segments(mut self, segments: FaceSegments) -> Result<Self> {
        self.face_segments = Some(segments);
        self.validate()?;
        Ok(self)
    }

    pub fn with_pose(mut self, pose: Pose) -> Self {
        self.pose = pose;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite vertex".into()));
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&vi| vi as usize >= n) {
                return Err(Error::InvalidGeometry(format!(
                    "face {i} references vertex out of range (mesh has {n} vertices)"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidGeometry(format!(
                    "face {i} is degenerate (repeated vertex index)"
                )));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(Error::InvalidGeometry(format!(
                    "{} normals for {} vertices",
                    normals.len(),
                    n
                )));
            }
            for nrm in normals {
                if (nrm.length() - 1.0).abs() > 1e-4 {
                    return Err(Error::InvalidGeometry(
                        "vertex normals must be unit length".into(),
                    ));
                }
            }
        }
        if let Some(segments) = &self.face_segments {
            if segments.segment_ids.len() != self.faces.len() {
                return Err(Error::InvalidGeometry(format!(
                    "{} segment ids for {} faces",
                    segments.segment_ids.len(),
                    self.faces.len()
                )));
            }
            for id in &segments.segment_ids {
                if !segments.materials.contains_key(id) {
                    return Err(Error::InvalidGeometry(format!(
                        "face segment id {id} has no material"
                    )));
                }
            }
            for mat in segments.materials.values() {
                mat.validate()?;
            }
        }
        self.appearance.material.validate()?;
        self.appearance
            .colors
            .bind_check(n, self.faces.len())?;
        Ok(())
    }

    /// Material shading a given face, honoring per-face segment overrides.
    pub fn face_material(&self, face: usize) -> &Material {
        if let Some(segments) = &self.face_segments {
            if let Some(mat) = segments.materials.get(&segments.segment_ids[face]) {
                return mat;
            }
        }
        &self.appearance.material
    }

    /// Geometric (unnormalized) face normal in mesh-local space.
    pub fn face_normal(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.faces[face];
        let va = self.vertices[a as usize];
        (self.vertices[b as usize] - va).cross(self.vertices[c as usize] - va)
    }
}

/// Shape used to instance individual points of a cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointShape {
    Sphere,
    Cube,
}

/// Point colors: one color broadcast to every point, or one per point.
#[derive(Debug, Clone)]
pub enum PointColors {
    Uniform([f64; 4]),
    PerPoint(Vec<[f64; 4]>),
}

/// Point cloud rendered as instanced analytic primitives.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub colors: Option<PointColors>,
    pub normals: Option<Vec<Vec3>>,
    pub point_shape: PointShape,
    pub point_radius: f64,
    pub emission_strength: f64,
    pub pose: Pose,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            colors: None,
            normals: None,
            point_shape: PointShape::Sphere,
            point_radius: 0.01,
            emission_strength: 0.0,
            pose: Pose::IDENTITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite point".into()));
        }
        if !(self.point_radius > 0.0) {
            return Err(Error::InvalidGeometry("point radius must be positive".into()));
        }
        if !self.emission_strength.is_finite() || self.emission_strength < 0.0 {
            return Err(Error::InvalidGeometry(
                "emission strength must be finite and non-negative".into(),
            ));
        }
        if let Some(PointColors::PerPoint(colors)) = &self.colors {
            if colors.len() != self.points.len() {
                return Err(Error::ColorBind(format!(
                    "{} colors for {} points",
                    colors.len(),
                    self.points.len()
                )));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != self.points.len() {
                return Err(Error::InvalidGeometry(format!(
                    "{} normals for {} points",
                    normals.len(),
                    self.points.len()
                )));
            }
        }
        Ok(())
    }
}

/// One renderable instance of a point.
#[derive(Debug, Clone, Copy)]
pub struct PointInstance {
    pub center: Vec3,
    pub shape: PointShape,
    pub radius: f64,
    pub color: [f64; 4],
    pub emission: f64,
}

/// Expands a point cloud into world-space instances, broadcasting a uniform
/// color when one is set. Cube instances stay axis-aligned in world space.
pub fn point_instances(pc: &PointCloud) -> Result<Vec<PointInstance>> {
    pc.validate()?;
    let default_color = [0.8, 0.8, 0.8, 1.0];
    Ok(pc
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let color = match &pc.colors {
                None => default_color,
                Some(PointColors::Uniform(c)) => *c,
                Some(PointColors::PerPoint(cs)) => cs[i],
            };
            PointInstance {
                center: pc.pose.transform_point(*p),
                shape: pc.point_shape,
                radius: pc.point_radius,
                color,
                emission: pc.emission_strength,
            }
        })
        .collect())
}

/// Analytic primitives tessellated into triangle meshes.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimitiveSpec {
    Cube {
        size: f64,
    },
    Circle {
        radius: f64,
        segments: u32,
    },
    Cylinder {
        radius: f64,
        height: f64,
        segments: u32,
    },
    Plane {
        size: f64,
        shadow_catcher: bool,
    },
    Ellipsoid {
        rx: f64,
        ry: f64,
        rz: f64,
        subdivisions: u32,
    },
    Sphere {
        radius: f64,
        subdivisions: u32,
    },
    Bezier {
        control_points: Vec<Vec3>,
        bevel_radius: f64,
        samples: u32,
    },
}

/// Sides of the tube swept along Bézier curves.
const BEZIER_TUBE_SIDES: u32 = 8;

pub fn tessellate(spec: &PrimitiveSpec) -> Result<TriMesh> {
    match *spec {
        PrimitiveSpec::Cube { size } => {
            require_positive(&[("size", size)])?;
            tessellate_cube(size)
        }
        PrimitiveSpec::Circle { radius, segments } => {
            require_positive(&[("radius", radius)])?;
            require_segments(segments)?;
            tessellate_circle(radius, segments)
        }
        PrimitiveSpec::Cylinder {
            radius,
            height,
            segments,
        } => {
            require_positive(&[("radius", radius), ("height", height)])?;
            require_segments(segments)?;
            tessellate_cylinder(radius, height, segments)
        }
        PrimitiveSpec::Plane {
            size,
            shadow_catcher,
        } => {
            require_positive(&[("size", size)])?;
            let h = size / 2.0;
            let mut mesh = TriMesh::new(
                vec![
                    Vec3::new(-h, -h, 0.0),
                    Vec3::new(h, -h, 0.0),
                    Vec3::new(h, h, 0.0),
                    Vec3::new(-h, h, 0.0),
                ],
                vec![[0, 1, 2], [0, 2, 3]],
            )?;
            mesh.shadow_catcher = shadow_catcher;
            Ok(mesh)
        }
        PrimitiveSpec::Ellipsoid {
            rx,
            ry,
            rz,
            subdivisions,
        } => {
            require_positive(&[("rx", rx), ("ry", ry), ("rz", rz)])?;
            tessellate_icosphere(rx, ry, rz, subdivisions)
        }
        PrimitiveSpec::Sphere {
            radius,
            subdivisions,
        } => {
            require_positive(&[("radius", radius)])?;
            tessellate_icosphere(radius, radius, radius, subdivisions)
        }
        PrimitiveSpec::Bezier {
            ref control_points,
            bevel_radius,
            samples,
        } => {
            if control_points.len() < 2 {
                return Err(Error::InvalidPrimitive(
                    "bezier needs at least 2 control points".into(),
                ));
            }
            require_positive(&[("bevel_radius", bevel_radius)])?;
            if samples < 2 {
                return Err(Error::InvalidPrimitive(
                    "bezier needs at least 2 samples".into(),
                ));
            }
            tessellate_bezier_tube(control_points, bevel_radius, samples)
        }
    }
}

fn require_positive(dims: &[(&str, f64)]) -> Result<()> {
    for (name, value) in dims {
        if !(*value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidPrimitive(format!(
                "{name} must be positive, got {value}"
            )));
        }
    }
    Ok(())
}

fn require_segments(segments: u32) -> Result<()> {
    if segments < 3 {
        Err(Error::InvalidPrimitive(format!(
            "segments must be at least 3, got {segments}"
        )))
    } else {
        Ok(())
    }
}

fn tessellate_cube(size: f64) -> Result<TriMesh> {
    let h = size / 2.0;
    let vertices = vec![
        Vec3::new(-h, -h, -h),
        Vec3::new(h, -h, -h),
        Vec3::new(h, h, -h),
        Vec3::new(-h, h, -h),
        Vec3::new(-h, -h, h),
        Vec3::new(h, -h, h),
        Vec3::new(h, h, h),
        Vec3::new(-h, h, h),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriMesh::new(vertices, faces)
}

fn tessellate_circle(radius: f64, segments: u32) -> Result<TriMesh> {
    let mut vertices = vec![Vec3::new(0.0, 0.0, 0.0)];
    for k in 0..segments {
        let a = std::f64::consts::TAU * k as f64 / segments as f64;
        vertices.push(Vec3::new(radius * a.cos(), radius * a.sin(), 0.0));
    }
    let faces = (0..segments)
        .map(|k| [0, 1 + k, 1 + (k + 1) % segments])
        .collect();
    TriMesh::new(vertices, faces)
}

fn tessellate_cylinder(radius: f64, height: f64, segments: u32) -> Result<TriMesh> {
    let h = height / 2.0;
    let s = segments;
    let mut vertices = Vec::with_capacity(2 * s as usize + 2);
    for &z in &[-h, h] {
        for k in 0..s {
            let a = std::f64::consts::TAU * k as f64 / s as f64;
            vertices.push(Vec3::new(radius * a.cos(), radius * a.sin(), z));
        }
    }
    let bottom_center = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, -h));
    let top_center = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, h));

    let mut faces = Vec::with_capacity(4 * s as usize);
    for k in 0..s {
        let k1 = (k + 1) % s;
        let (b0, b1, t0, t1) = (k, k1, s + k, s + k1);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([bottom_center, b1, b0]);
        faces.push([top_center, t0, t1]);
    }
    TriMesh::new(vertices, faces)
}

fn tessellate_icosphere(rx: f64, ry: f64, rz: f64, subdivisions: u32) -> Result<TriMesh> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mids = [0u32; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mids[e] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]).normalized();
                    vertices.push(m);
                    vertices.len() as u32 - 1
                });
            }
            next_faces.push([f[0], mids[0], mids[2]]);
            next_faces.push([f[1], mids[1], mids[0]]);
            next_faces.push([f[2], mids[2], mids[1]]);
            next_faces.push([mids[0], mids[1], mids[2]]);
        }
        faces = next_faces;
    }

    let vertices = vertices
        .into_iter()
        .map(|v| Vec3::new(v.x * rx, v.y * ry, v.z * rz))
        .collect();
    TriMesh::new(vertices, faces)
}

/// de Casteljau evaluation of a Bézier curve at parameter `t`.
pub fn sample_bezier(control_points: &[Vec3], t: f64) -> Vec3 {
    let mut pts = control_points.to_vec();
    while pts.len() > 1 {
        for i in 0..pts.len() - 1 {
            pts[i] = pts[i] * (1.0 - t) + pts[i + 1] * t;
        }
        pts.pop();
    }
    pts[0]
}

fn bezier_tangent(control_points: &[Vec3], t: f64) -> Vec3 {
    let k = control_points.len();
    if k < 2 {
        return Vec3::new(1.0, 0.0, 0.0);
    }
    let scale = (k - 1) as f64;
    let derivative: Vec<Vec3> = (0..k - 1)
        .map(|i| (control_points[i + 1] - control_points[i]) * scale)
        .collect();
    sample_bezier(&derivative, t)
}

fn tessellate_bezier_tube(
    control_points: &[Vec3],
    bevel_radius: f64,
    samples: u32,
) -> Result<TriMesh> {
    let n = samples as usize;
    let mut centers = Vec::with_capacity(n);
    let mut tangents = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        centers.push(sample_bezier(control_points, t));
        tangents.push(bezier_tangent(control_points, t));
    }
    // Fall back to chord directions where the derivative vanishes
    // (repeated control points).
    for i in 0..n {
        if tangents[i].try_normalized().is_none() {
            let chord = if i + 1 < n {
                centers[i + 1] - centers[i]
            } else {
                centers[i] - centers[i - 1]
            };
            tangents[i] = chord;
        }
    }
    let tangents: Vec<Vec3> = tangents
        .iter()
        .map(|t| {
            t.try_normalized().ok_or_else(|| {
                Error::InvalidPrimitive("bezier curve degenerates to a point".into())
            })
        })
        .collect::<Result<_>>()?;

    // Rotation-minimizing frames by the double-reflection method.
    let t0 = tangents[0];
    let pick = if t0.x.abs() <= t0.y.abs() && t0.x.abs() <= t0.z.abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if t0.y.abs() <= t0.z.abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let mut normals = vec![(pick - t0 * pick.dot(t0)).normalized()];
    for i in 0..n - 1 {
        let v1 = centers[i + 1] - centers[i];
        let c1 = v1.dot(v1);
        if c1 <= 1e-30 {
            normals.push(normals[i]);
            continue;
        }
        let r_l = normals[i] - v1 * (2.0 / c1 * v1.dot(normals[i]));
        let t_l = tangents[i] - v1 * (2.0 / c1 * v1.dot(tangents[i]));
        let v2 = tangents[i + 1] - t_l;
        let c2 = v2.dot(v2);
        let next = if c2 <= 1e-30 {
            r_l
        } else {
            r_l - v2 * (2.0 / c2 * v2.dot(r_l))
        };
        // Re-orthogonalize against the actual tangent to stop drift.
        let next = (next - tangents[i + 1] * next.dot(tangents[i + 1])).normalized();
        normals.push(next);
    }

    let sides = BEZIER_TUBE_SIDES;
    let mut vertices = Vec::with_capacity(n * sides as usize + 2);
    for i in 0..n {
        let b = tangents[i].cross(normals[i]);
        for k in 0..sides {
            let a = std::f64::consts::TAU * k as f64 / sides as f64;
            vertices.push(centers[i] + (normals[i] * a.cos() + b * a.sin()) * bevel_radius);
        }
    }
    let start_center = vertices.len() as u32;
    vertices.push(centers[0]);
    let end_center = vertices.len() as u32;
    vertices.push(centers[n - 1]);

    let mut faces = Vec::new();
    for i in 0..(n - 1) as u32 {
        for k in 0..sides {
            let k1 = (k + 1) % sides;
            let (a0, a1) = (i * sides + k, i * sides + k1);
            let (b0, b1) = ((i + 1) * sides + k, (i + 1) * sides + k1);
            faces.push([a0, a1, b1]);
            faces.push([a0, b1, b0]);
        }
    }
    let last = (n as u32 - 1) * sides;
    for k in 0..sides {
        let k1 = (k + 1) % sides;
        faces.push([start_center, k1, k]);
        faces.push([end_center, last + k, last + k1]);
    }
    TriMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::BTreeSet;

    fn edge_count(faces: &[[u32; 3]]) -> usize {
        let mut edges = BTreeSet::new();
        for f in faces {
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    fn surface_area(mesh: &TriMesh) -> f64 {
        (0..mesh.faces.len())
            .map(|f| mesh.face_normal(f).length() / 2.0)
            .sum()
    }

    #[test]
    fn cube_has_8_vertices_12_faces_and_the_right_bounds() {
        let mesh = tessellate(&PrimitiveSpec::Cube { size: 2.0 }).unwrap();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.faces.len(), 12);
        let min = mesh.vertices.iter().fold(Vec3::splat(f64::MAX), |m, v| m.min(*v));
        let max = mesh.vertices.iter().fold(Vec3::splat(f64::MIN), |m, v| m.max(*v));
        assert_eq!(min, Vec3::new(-1.0, -1.0, -1.0));
        assert_eq!(max, Vec3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn closed_primitives_satisfy_euler_characteristic() {
        let specs = [
            PrimitiveSpec::Cube { size: 1.0 },
            PrimitiveSpec::Cylinder {
                radius: 0.5,
                height: 2.0,
                segments: 16,
            },
            PrimitiveSpec::Sphere {
                radius: 1.0,
                subdivisions: 1,
            },
            PrimitiveSpec::Ellipsoid {
                rx: 1.0,
                ry: 2.0,
                rz: 0.5,
                subdivisions: 2,
            },
            PrimitiveSpec::Bezier {
                control_points: vec![
                    Vec3::new(0.0, 0.0, 0.0),
                    Vec3::new(1.0, 1.0, 0.0),
                    Vec3::new(2.0, 0.0, 1.0),
                ],
                bevel_radius: 0.1,
                samples: 12,
            },
        ];
        for spec in &specs {
            let mesh = tessellate(spec).unwrap();
            let v = mesh.vertices.len() as i64;
            let e = edge_count(&mesh.faces) as i64;
            let f = mesh.faces.len() as i64;
            assert_eq!(v - e + f, 2, "Euler characteristic failed for {spec:?}");
        }
    }

    #[test]
    fn icosphere_subdivision_2_has_320_unit_radius_faces() {
        let mesh = tessellate(&PrimitiveSpec::Sphere {
            radius: 1.0,
            subdivisions: 2,
        })
        .unwrap();
        assert_eq!(mesh.faces.len(), 320);
        assert_eq!(mesh.vertices.len(), 162);
        for v in &mesh.vertices {
            assert!((v.length() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_face_count_matches_subdivision_formula() {
        for sub in 0..4u32 {
            let mesh = tessellate(&PrimitiveSpec::Sphere {
                radius: 2.0,
                subdivisions: sub,
            })
            .unwrap();
            assert_eq!(mesh.faces.len(), 20 * 4usize.pow(sub));
            for v in &mesh.vertices {
                assert!((v.length() - 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn triangle_circle_has_inscribed_triangle_area() {
        let mesh = tessellate(&PrimitiveSpec::Circle {
            radius: 1.0,
            segments: 3,
        })
        .unwrap();
        assert_relative_eq!(
            surface_area(&mesh),
            3.0 * 3.0f64.sqrt() / 4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn cylinder_area_converges_to_analytic_value() {
        let (r, h) = (0.7, 2.3);
        let mesh = tessellate(&PrimitiveSpec::Cylinder {
            radius: r,
            height: h,
            segments: 256,
        })
        .unwrap();
        let analytic = std::f64::consts::TAU * r * (h + r);
        let measured = surface_area(&mesh);
        assert!((measured - analytic).abs() / analytic < 0.01);
    }

    #[test]
    fn bezier_linear_midpoint_and_quadratic_closed_form() {
        let line = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 4.0, 6.0)];
        assert_eq!(sample_bezier(&line, 0.5), Vec3::new(1.0, 2.0, 3.0));

        let quad = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let p = sample_bezier(&quad, 0.5);
        assert_relative_eq!(p.x, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.y, 0.5, max_relative = 1e-12);
        assert_eq!(p.z, 0.0);
    }

    #[test]
    fn bezier_matches_bernstein_polynomial_oracle() {
        fn binomial(n: usize, k: usize) -> f64 {
            (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
        }
        let cps = [
            Vec3::new(0.3, -1.0, 2.0),
            Vec3::new(1.5, 2.0, -0.5),
            Vec3::new(-0.7, 0.4, 1.1),
            Vec3::new(2.2, -0.3, 0.9),
            Vec3::new(0.0, 1.0, -2.0),
        ];
        let n = cps.len() - 1;
        for step in 0..=50 {
            let t = step as f64 / 50.0;
            let mut oracle = Vec3::new(0.0, 0.0, 0.0);
            for (k, cp) in cps.iter().enumerate() {
                let w = binomial(n, k) * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32);
                oracle = oracle + *cp * w;
            }
            let got = sample_bezier(&cps, t);
            assert!((got - oracle).length() < 1e-12);
        }
    }

    #[test]
    fn bezier_interpolates_endpoints_for_random_polygons() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let k = rng.random_range(2..8);
            let cps: Vec<Vec3> = (0..k)
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                    )
                })
                .collect();
            assert!((sample_bezier(&cps, 0.0) - cps[0]).length() < 1e-12);
            assert!((sample_bezier(&cps, 1.0) - cps[k - 1]).length() < 1e-12);
        }
    }

    #[test]
    fn point_instances_broadcast_uniform_colors() {
        let mut pc = PointCloud::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ]);
        pc.colors = Some(PointColors::Uniform([1.0, 0.0, 0.0, 1.0]));
        let instances = point_instances(&pc).unwrap();
        assert_eq!(instances.len(), 3);
        for inst in &instances {
            assert_eq!(inst.color, [1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn point_instances_carry_per_point_colors() {
        let mut pc = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
        let colors = vec![[0.1, 0.2, 0.3, 1.0], [0.4, 0.5, 0.6, 0.5]];
        pc.colors = Some(PointColors::PerPoint(colors.clone()));
        let instances = point_instances(&pc).unwrap();
        assert_eq!(instances[0].color, colors[0]);
        assert_eq!(instances[1].color, colors[1]);
    }

    #[test]
    fn point_instances_apply_the_pose_translation() {
        let mut pc = PointCloud::new(vec![Vec3::new(1.0, 2.0, 3.0)]);
        pc.pose.position = Vec3::new(0.0, 0.0, 1.0);
        let instances = point_instances(&pc).unwrap();
        assert_eq!(instances[0].center, Vec3::new(1.0, 2.0, 4.0));
    }

    #[test]
    fn degenerate_faces_and_bad_indices_are_rejected() {
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        assert!(TriMesh::new(verts.clone(), vec![[0, 0, 1]]).is_err());
        assert!(TriMesh::new(verts, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn invalid_primitive_dimensions_error() {
        assert!(tessellate(&PrimitiveSpec::Cube { size: 0.0 }).is_err());
        assert!(tessellate(&PrimitiveSpec::Circle {
            radius: 1.0,
            segments: 2
        })
        .is_err());
        assert!(tessellate(&PrimitiveSpec::Sphere {
            radius: -1.0,
            subdivisions: 1
        })
        .is_err());
    }
}
