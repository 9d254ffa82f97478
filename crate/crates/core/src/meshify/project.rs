//! Closest-point projection of a pointcloud onto a triangle mesh.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::render::{Aabb, Bvh};
use crate::renderable::TriMesh;

/// Where a point lands on the mesh: owning face, barycentric coordinates
/// of the foot, and the distance travelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub face: u32,
    pub bary: [f64; 3],
    pub distance: f64,
}

/// Closest point on triangle `(a, b, c)` to `p`, with its barycentric
/// coordinates.
pub(crate) fn closest_point_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Projects every point to its closest location on the mesh surface.
/// Equal distances resolve to the lowest face index.
pub fn project_points_to_mesh(points: &[Vec3], mesh: &TriMesh) -> Result<Vec<Projection>> {
    if mesh.faces.is_empty() {
        return Err(Error::InvalidGeometry(
            "cannot project onto a mesh with no faces".into(),
        ));
    }
    mesh.validate()?;
    let corners: Vec<[Vec3; 3]> = mesh
        .faces
        .iter()
        .map(|f| {
            [
                mesh.vertices[f[0] as usize],
                mesh.vertices[f[1] as usize],
                mesh.vertices[f[2] as usize],
            ]
        })
        .collect();
    let bounds: Vec<Aabb> = corners.iter().map(|c| Aabb::of_points(c)).collect();
    let bvh = Bvh::build(&bounds);

    Ok(points
        .par_iter()
        .map(|&p| {
            let mut best = Projection {
                face: u32::MAX,
                bary: [0.0; 3],
                distance: f64::INFINITY,
            };
            let mut best_d2 = f64::INFINITY;
            bvh.walk_nearest(p, &mut best_d2, &mut |face, pruned| {
                let [a, b, c] = corners[face as usize];
                let (foot, bary) = closest_point_triangle(p, a, b, c);
                let d2 = (p - foot).length_squared();
                if d2 < *pruned || (d2 == *pruned && face < best.face) {
                    best = Projection {
                        face,
                        bary,
                        distance: d2.sqrt(),
                    };
                    *pruned = d2;
                }
            });
            best
        })
        .collect())
}
