//! Point-cloud utilities: PCA normal estimation and camera-conditioned
//! colorization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::KnnIndex;
use crate::linalg::eigen_symmetric3;
use crate::math::{Mat3, Vec3};

pub const DEFAULT_BACK_COLOR: [f64; 3] = [0.8, 0.8, 0.8];
pub const DEFAULT_BACK_ALPHA: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub normals: Vec<Vec3>,
    /// Set where the two smallest covariance eigenvalues coincide, so the
    /// normal direction within the local tangent plane is arbitrary.
    pub degenerate: Vec<bool>,
}

/// Per-point unit normals from the covariance of each point's `k` nearest
/// neighbors (the point itself included). With an orientation reference,
/// normals flip to satisfy `n . (reference - p) >= 0`; without one, the
/// sign is canonical (largest-magnitude component non-negative).
pub fn estimate_normals_from_pointcloud(
    points: &[Vec3],
    k: usize,
    orientation_reference: Option<Vec3>,
) -> Result<NormalEstimate> {
    if k < 3 {
        return Err(Error::InvalidSettings(
            "normal estimation needs k >= 3".into(),
        ));
    }
    if points.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k,
            got: points.len(),
        });
    }
    let index = KnnIndex::build(points)?;

    let per_point: Vec<(Vec3, bool)> = points
        .par_iter()
        .map(|&p| {
            let neighbors = index.nearest(p, k);
            let inv = 1.0 / neighbors.len() as f64;
            let mut mean = Vec3::ZERO;
            for (i, _) in &neighbors {
                mean += index.point(*i);
            }
            mean = mean * inv;
            let mut cov = [[0.0f64; 3]; 3];
            for (i, _) in &neighbors {
                let d = index.point(*i) - mean;
                let d = d.to_array();
                for (r, dr) in d.iter().enumerate() {
                    for (c, dc) in d.iter().enumerate() {
                        cov[r][c] += dr * dc * inv;
                    }
                }
            }
            let (values, vectors) = eigen_symmetric3(&Mat3 { m: cov });
            // Eigenvalue scale tracks the squared neighborhood size; keep
            // the tie test absolute at unit scale and relative beyond it.
            let tie = 1e-9 * values[2].max(1.0);
            let degenerate = (values[1] - values[0]).abs() <= tie;
            let mut normal = vectors[0];
            if let Some(reference) = orientation_reference {
                if normal.dot(reference - p) < 0.0 {
                    normal = -normal;
                }
            }
            (normal, degenerate)
        })
        .collect();

    let mut normals = Vec::with_capacity(points.len());
    let mut degenerate = Vec::with_capacity(points.len());
    for (n, d) in per_point {
        normals.push(n);
        degenerate.push(d);
    }
    Ok(NormalEstimate { normals, degenerate })
}

/// Colors points by facing: a point is back-facing iff
/// `normal . (camera_position - point) < 0`. Front-facing points keep
/// their color with alpha 1; back-facing points get the back color and
/// alpha. `front_colors` holds one color for all points or one per point.
pub fn approximate_colors_from_camera(
    points: &[Vec3],
    normals: &[Vec3],
    camera_position: Vec3,
    front_colors: &[[f64; 3]],
    back_color: [f64; 3],
    back_alpha: f64,
) -> Result<Vec<[f64; 4]>> {
    if normals.len() != points.len() {
        return Err(Error::ColorBind(format!(
            "{} normals for {} points",
            normals.len(),
            points.len()
        )));
    }
    if front_colors.len() != 1 && front_colors.len() != points.len() {
        return Err(Error::ColorBind(format!(
            "{} front colors for {} points (expected 1 or {})",
            front_colors.len(),
            points.len(),
            points.len()
        )));
    }
    Ok(points
        .iter()
        .zip(normals)
        .enumerate()
        .map(|(i, (&p, &n))| {
            if n.dot(camera_position - p) < 0.0 {
                [back_color[0], back_color[1], back_color[2], back_alpha]
            } else {
                let c = if front_colors.len() == 1 {
                    front_colors[0]
                } else {
                    front_colors[i]
                };
                [c[0], c[1], c[2], 1.0]
            }
        })
        .collect())
}
