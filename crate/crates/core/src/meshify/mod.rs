//! Pointcloud to textured mesh: reconstruction, simplification, UV atlas
//! and texture bake.

mod atlas;
mod bake;
mod ball_pivot;
mod project;
mod simplify;

pub use atlas::{build_face_atlas, min_atlas_resolution};
pub use bake::bake_texture;
pub use ball_pivot::ball_pivot;
pub use project::{project_points_to_mesh, Projection};
pub use simplify::simplify_mesh;

use crate::appearance::{Appearance, ColorSource, UVMap};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::math::Vec3;
use crate::pc::estimate_normals_from_pointcloud;
use crate::renderable::TriMesh;

/// Knobs for the pointcloud-to-mesh pipeline.
#[derive(Debug, Clone)]
pub struct MeshifyConfig {
    /// Ball-pivot radii, strictly ascending.
    pub bpa_radii: Vec<f64>,
    /// Face budget after simplification.
    pub target_faces: usize,
    /// Square texture side in pixels.
    pub texture_resolution: u32,
    /// Margin between atlas triangles in pixels.
    pub gap_px: u32,
    /// Projected points averaged per texel.
    pub bake_k: usize,
    /// Neighborhood size for normal estimation when the cloud has none.
    pub normal_k: usize,
}

impl MeshifyConfig {
    pub fn new(bpa_radii: Vec<f64>, target_faces: usize) -> Self {
        MeshifyConfig {
            bpa_radii,
            target_faces,
            texture_resolution: 512,
            gap_px: 2,
            bake_k: 4,
            normal_k: 16,
        }
    }
}

/// A mesh with a per-face UV atlas and its baked texture.
#[derive(Debug, Clone)]
pub struct TexturedMesh {
    pub mesh: TriMesh,
    pub uv: UVMap,
    pub texture: Image,
}

impl TexturedMesh {
    /// Attaches the texture as the mesh appearance, ready to render.
    pub fn into_renderable(self) -> Result<TriMesh> {
        let appearance = Appearance {
            colors: ColorSource::texture(self.texture, self.uv)?,
            ..Appearance::default()
        };
        self.mesh.with_appearance(appearance)
    }
}

/// Runs the full pipeline over a colored pointcloud. Normals are
/// estimated (oriented away from the centroid) when not supplied. The
/// returned stage list names each step that actually ran.
pub fn meshify_pc(
    points: &[Vec3],
    colors: &[[f64; 3]],
    normals: Option<&[Vec3]>,
    config: &MeshifyConfig,
) -> Result<(TexturedMesh, Vec<&'static str>)> {
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            got: points.len(),
        });
    }
    if colors.len() != points.len() {
        return Err(Error::ColorBind(format!(
            "{} colors for {} points",
            colors.len(),
            points.len()
        )));
    }
    let mut stages = Vec::new();

    let normals: Vec<Vec3> = match normals {
        Some(n) => {
            if n.len() != points.len() {
                return Err(Error::InvalidGeometry(format!(
                    "{} normals for {} points",
                    n.len(),
                    points.len()
                )));
            }
            n.to_vec()
        }
        None => {
            stages.push("estimate_normals");
            let k = config.normal_k.clamp(3, points.len() - 1);
            let estimate = estimate_normals_from_pointcloud(points, k, None)
                .map_err(|e| e.in_stage("estimate_normals"))?;
            let centroid =
                points.iter().fold(Vec3::ZERO, |acc, p| acc + *p) / points.len() as f64;
            estimate
                .normals
                .iter()
                .zip(points)
                .map(|(n, p)| {
                    if n.dot(*p - centroid) < 0.0 {
                        -*n
                    } else {
                        *n
                    }
                })
                .collect()
        }
    };

    stages.push("ball_pivot");
    let dense = ball_pivot(points, &normals, &config.bpa_radii)
        .map_err(|e| e.in_stage("ball_pivot"))?;

    stages.push("simplify");
    let (mesh, _reached) =
        simplify_mesh(&dense, config.target_faces).map_err(|e| e.in_stage("simplify"))?;

    stages.push("atlas");
    let uv = build_face_atlas(&mesh, config.texture_resolution, config.gap_px)
        .map_err(|e| e.in_stage("atlas"))?;

    stages.push("project");
    let projections =
        project_points_to_mesh(points, &mesh).map_err(|e| e.in_stage("project"))?;

    stages.push("bake");
    let texture = bake_texture(
        &mesh,
        &uv,
        points,
        colors,
        &projections,
        config.bake_k,
        config.gap_px,
        config.texture_resolution,
    )
    .map_err(|e| e.in_stage("bake"))?;

    Ok((TexturedMesh { mesh, uv, texture }, stages))
}
