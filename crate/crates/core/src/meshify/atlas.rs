//! Per-face UV atlas: every face gets its own texture triangle.
//!
//! Faces pack two per square cell on a uniform grid, one in the lower
//! left and one (rotated half a turn) in the upper right. Triangles are
//! inset from the cell walls by the gap and pulled off the shared
//! diagonal far enough that rasterized footprints never touch, which
//! stops bilinear lookups from bleeding between faces.

use crate::appearance::UVMap;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::renderable::TriMesh;

/// Cells per grid side for `faces` faces.
fn grid_side(faces: usize) -> u32 {
    let cells = faces.div_ceil(2);
    (cells as f64).sqrt().ceil() as u32
}

/// Smallest texture resolution that fits `faces` faces with `gap_px`.
pub fn min_atlas_resolution(faces: usize, gap_px: u32) -> u32 {
    grid_side(faces) * (2 * gap_px + 3)
}

/// Isometric flattening of a 3D triangle: the longest edge lies on the
/// x-axis and the third corner keeps its true distances.
fn flatten(p: [Vec3; 3]) -> [[f64; 2]; 3] {
    let lengths = [
        (p[1] - p[0]).length(),
        (p[2] - p[1]).length(),
        (p[0] - p[2]).length(),
    ];
    let mut base = 0;
    for e in 1..3 {
        if lengths[e] > lengths[base] {
            base = e;
        }
    }
    let (i, j, k) = (base, (base + 1) % 3, (base + 2) % 3);
    let l = lengths[base];
    let mut out = [[0.0f64; 2]; 3];
    if l <= 1e-30 {
        return out;
    }
    let ex = (p[j] - p[i]) / l;
    let rel = p[k] - p[i];
    let x = rel.dot(ex);
    let y = (rel - ex * x).length();
    out[i] = [0.0, 0.0];
    out[j] = [l, 0.0];
    out[k] = [x, y];
    out
}

/// Maps each mesh face to a disjoint triangle in `[0, 1]^2` at the given
/// texture resolution.
pub fn build_face_atlas(mesh: &TriMesh, texture_resolution: u32, gap_px: u32) -> Result<UVMap> {
    let m = mesh.faces.len();
    if m == 0 {
        return Err(Error::InvalidGeometry(
            "cannot build an atlas for a mesh with no faces".into(),
        ));
    }
    if gap_px == 0 {
        return Err(Error::InvalidSettings("atlas gap must be at least 1 px".into()));
    }
    let g = grid_side(m);
    let cell = texture_resolution / g;
    if cell < 2 * gap_px + 3 {
        return Err(Error::AtlasCapacity {
            faces: m,
            resolution: texture_resolution,
            gap_px,
            min_resolution: min_atlas_resolution(m, gap_px),
        });
    }

    let s = cell as f64;
    let gap = gap_px as f64;
    // Pull the hypotenuse in along x+y so the two cell mates end up two
    // gaps apart; never below one pixel of leg.
    let diag_inset = (gap * std::f64::consts::SQRT_2).min(s - 2.0 * gap - 1.0);
    let leg = s - 2.0 * gap - diag_inset;

    let mut uv = Vec::with_capacity(m);
    for (fi, face) in mesh.faces.iter().enumerate() {
        let cell_idx = (fi / 2) as u32;
        let (cx, cy) = (cell_idx % g, cell_idx / g);
        let flat = flatten([
            mesh.vertices[face[0] as usize],
            mesh.vertices[face[1] as usize],
            mesh.vertices[face[2] as usize],
        ]);
        let min_x = flat.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let max_x = flat.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let max_y = flat.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let (w, h) = (max_x - min_x, max_y);
        // A w x h box scaled by k fits the right-triangle region when
        // k(w + h) <= leg.
        let k = if w + h > 1e-30 { leg / (w + h) } else { 0.0 };

        let origin_x = (cx * cell) as f64;
        let origin_y = (cy * cell) as f64;
        let lower = fi % 2 == 0;
        let mut corners = [[0.0f64; 2]; 3];
        for (c, p) in flat.iter().enumerate() {
            let local = [k * (p[0] - min_x), k * p[1]];
            corners[c] = if lower {
                [origin_x + gap + local[0], origin_y + gap + local[1]]
            } else {
                [
                    origin_x + s - gap - local[0],
                    origin_y + s - gap - local[1],
                ]
            };
        }
        let r = texture_resolution as f64;
        uv.push([
            [corners[0][0] / r, corners[0][1] / r],
            [corners[1][0] / r, corners[1][1] / r],
            [corners[2][0] / r, corners[2][1] / r],
        ]);
    }
    Ok(UVMap::FacesUv(uv))
}
