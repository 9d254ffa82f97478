//! Texture baking: colors projected points onto the atlas.
//!
//! Each texel center inside an atlas triangle maps back to a point on the
//! mesh surface (barycentric inversion), takes the inverse-distance
//! weighted average of the nearest projected point colors, and the gap
//! rings between triangles are filled by dilation so bilinear lookups
//! never blend into unset texels.

use rayon::prelude::*;

use crate::appearance::UVMap;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::knn::KnnIndex;
use crate::math::Vec3;
use crate::renderable::TriMesh;

use super::project::Projection;

const DISTANCE_EPS: f64 = 1e-6;

/// Bakes point colors into an RGBA texture for the atlased mesh. The
/// dilation ring is sized to flood `2 * gap_px + 2` texels outward from
/// every covered region; everything further stays black.
#[allow(clippy::too_many_arguments)]
pub fn bake_texture(
    mesh: &TriMesh,
    faces_uv: &UVMap,
    points: &[Vec3],
    point_colors: &[[f64; 3]],
    projections: &[Projection],
    bake_k: usize,
    gap_px: u32,
    resolution: u32,
) -> Result<Image> {
    if points.is_empty() || projections.is_empty() {
        return Err(Error::EmptyBake);
    }
    if point_colors.len() != points.len() || projections.len() != points.len() {
        return Err(Error::ColorBind(format!(
            "{} points, {} colors, {} projections",
            points.len(),
            point_colors.len(),
            projections.len()
        )));
    }
    if bake_k == 0 {
        return Err(Error::InvalidSettings(
            "bake needs at least one neighbor".into(),
        ));
    }
    if resolution == 0 {
        return Err(Error::InvalidImage("zero-sized texture".into()));
    }
    let uv = match faces_uv {
        UVMap::FacesUv(uv) => uv,
        UVMap::VertexUv(_) => {
            return Err(Error::ColorBind(
                "bake needs a per-face UV map".into(),
            ))
        }
    };
    if uv.len() != mesh.faces.len() {
        return Err(Error::ColorBind(format!(
            "{} UV triangles for {} faces",
            uv.len(),
            mesh.faces.len()
        )));
    }

    // Surface feet of the projected points, in 3D.
    let feet: Vec<Vec3> = projections
        .iter()
        .map(|pr| {
            let f = mesh
                .faces
                .get(pr.face as usize)
                .ok_or_else(|| {
                    Error::ColorBind(format!(
                        "projection references face {} of {}",
                        pr.face,
                        mesh.faces.len()
                    ))
                })?;
            Ok(mesh.vertices[f[0] as usize] * pr.bary[0]
                + mesh.vertices[f[1] as usize] * pr.bary[1]
                + mesh.vertices[f[2] as usize] * pr.bary[2])
        })
        .collect::<Result<_>>()?;
    let index = KnnIndex::build(&feet)?;
    let k = bake_k.min(feet.len());

    let r = resolution as usize;
    // Row-major from the bottom (uv layout); flipped when building the
    // image at the end.
    let mut texel_face = vec![u32::MAX; r * r];
    let mut texel_bary = vec![[0.0f64; 3]; r * r];
    for (fi, tri) in uv.iter().enumerate() {
        let px: Vec<[f64; 2]> = tri
            .iter()
            .map(|c| [c[0] * resolution as f64, c[1] * resolution as f64])
            .collect();
        let e1 = [px[1][0] - px[0][0], px[1][1] - px[0][1]];
        let e2 = [px[2][0] - px[0][0], px[2][1] - px[0][1]];
        let det = e1[0] * e2[1] - e2[0] * e1[1];
        if det.abs() < 1e-12 {
            continue;
        }
        let min_x = px.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let max_x = px.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let min_y = px.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let max_y = px.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let x0 = (min_x.floor().max(0.0)) as usize;
        let x1 = (max_x.ceil().min(r as f64)) as usize;
        let y0 = (min_y.floor().max(0.0)) as usize;
        let y1 = (max_y.ceil().min(r as f64)) as usize;
        for ty in y0..y1 {
            for tx in x0..x1 {
                let d = [tx as f64 + 0.5 - px[0][0], ty as f64 + 0.5 - px[0][1]];
                let b1 = (d[0] * e2[1] - e2[0] * d[1]) / det;
                let b2 = (e1[0] * d[1] - d[0] * e1[1]) / det;
                let b0 = 1.0 - b1 - b2;
                if b0 >= 0.0 && b1 >= 0.0 && b2 >= 0.0 {
                    texel_face[ty * r + tx] = fi as u32;
                    texel_bary[ty * r + tx] = [b0, b1, b2];
                }
            }
        }
    }

    let mut buf: Vec<Option<[f64; 3]>> = texel_face
        .par_iter()
        .zip(texel_bary.par_iter())
        .map(|(&fi, bary)| {
            if fi == u32::MAX {
                return None;
            }
            let f = mesh.faces[fi as usize];
            let pre = mesh.vertices[f[0] as usize] * bary[0]
                + mesh.vertices[f[1] as usize] * bary[1]
                + mesh.vertices[f[2] as usize] * bary[2];
            let mut color = [0.0f64; 3];
            let mut total = 0.0;
            for (i, d) in index.nearest(pre, k) {
                let w = 1.0 / (d + DISTANCE_EPS);
                for c in 0..3 {
                    color[c] += w * point_colors[i][c];
                }
                total += w;
            }
            for c in color.iter_mut() {
                *c /= total;
            }
            Some(color)
        })
        .collect();

    // Synchronous dilation: unset texels take the average of their set
    // 8-neighbors, expanding one ring per round.
    for _ in 0..2 * gap_px + 2 {
        let snapshot = buf.clone();
        buf.par_iter_mut().enumerate().for_each(|(idx, slot)| {
            if slot.is_some() {
                return;
            }
            let (tx, ty) = (idx % r, idx / r);
            let mut sum = [0.0f64; 3];
            let mut n = 0u32;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (tx as i64 + dx, ty as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= r as i64 || ny >= r as i64 {
                        continue;
                    }
                    if let Some(c) = snapshot[ny as usize * r + nx as usize] {
                        for ch in 0..3 {
                            sum[ch] += c[ch];
                        }
                        n += 1;
                    }
                }
            }
            if n > 0 {
                *slot = Some([sum[0] / n as f64, sum[1] / n as f64, sum[2] / n as f64]);
            }
        });
    }

    let mut data = vec![[0.0f32, 0.0, 0.0, 1.0]; r * r];
    for ty in 0..r {
        for tx in 0..r {
            if let Some(c) = buf[ty * r + tx] {
                // uv row ty counts from the bottom; storage from the top.
                data[(r - 1 - ty) * r + tx] =
                    [c[0] as f32, c[1] as f32, c[2] as f32, 1.0];
            }
        }
    }
    Image::new(resolution, resolution, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshify::{build_face_atlas, project_points_to_mesh};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad_mesh(origin: Vec3, size: f64) -> (Vec<Vec3>, Vec<[u32; 3]>) {
        let v = vec![
            origin,
            origin + Vec3::new(size, 0.0, 0.0),
            origin + Vec3::new(size, size, 0.0),
            origin + Vec3::new(0.0, size, 0.0),
        ];
        (v, vec![[0, 1, 2], [0, 2, 3]])
    }

    fn scatter(origin: Vec3, size: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                origin
                    + Vec3::new(
                        rng.random_range(0.0..size),
                        rng.random_range(0.0..size),
                        0.0,
                    )
            })
            .collect()
    }

    #[test]
    fn constant_point_colors_cover_every_texel_with_that_color() {
        let (v, f) = quad_mesh(Vec3::ZERO, 1.0);
        let mesh = TriMesh::new(v, f).unwrap();
        let uv = build_face_atlas(&mesh, 64, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = scatter(Vec3::ZERO, 1.0, 200, &mut rng);
        let colors = vec![[0.25, 0.5, 0.75]; pts.len()];
        let projections = project_points_to_mesh(&pts, &mesh).unwrap();
        let img = bake_texture(&mesh, &uv, &pts, &colors, &projections, 4, 2, 64).unwrap();
        let mut covered = 0;
        for px in img.pixels() {
            if px[0] != 0.0 || px[1] != 0.0 || px[2] != 0.0 {
                covered += 1;
                assert!((px[0] - 0.25).abs() < 1e-6);
                assert!((px[1] - 0.5).abs() < 1e-6);
                assert!((px[2] - 0.75).abs() < 1e-6);
            }
        }
        // Two aspect-fit triangles plus their dilation rings: roughly a
        // third of the texture at this size.
        assert!(covered > 64 * 64 / 6, "only {covered} texels covered");
    }

    #[test]
    fn separated_clusters_do_not_bleed_into_each_other() {
        // Two unit quads 100 apart sharing one mesh; red points over the
        // first, blue over the second.
        let (mut v, mut f) = quad_mesh(Vec3::ZERO, 1.0);
        let (v2, f2) = quad_mesh(Vec3::new(100.0, 0.0, 0.0), 1.0);
        let base = v.len() as u32;
        v.extend(v2);
        f.extend(f2.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
        let mesh = TriMesh::new(v, f).unwrap();
        let r = 128u32;
        let uv = build_face_atlas(&mesh, r, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pts = scatter(Vec3::ZERO, 1.0, 300, &mut rng);
        pts.extend(scatter(Vec3::new(100.0, 0.0, 0.0), 1.0, 300, &mut rng));
        let mut colors = vec![[1.0, 0.0, 0.0]; 300];
        colors.extend(vec![[0.0, 0.0, 1.0]; 300]);
        let projections = project_points_to_mesh(&pts, &mesh).unwrap();
        let img = bake_texture(&mesh, &uv, &pts, &colors, &projections, 4, 2, r).unwrap();

        // Texels rasterized inside the first quad's atlas triangles must
        // be pure red; barycentric centers of those faces are enough.
        let tris = match &uv {
            UVMap::FacesUv(t) => t,
            _ => unreachable!(),
        };
        for fi in 0..2 {
            let t = tris[fi];
            let cu = (t[0][0] + t[1][0] + t[2][0]) / 3.0;
            let cv = (t[0][1] + t[1][1] + t[2][1]) / 3.0;
            let px = img.sample(cu, cv);
            assert!((px[0] - 1.0).abs() < 1.0 / 255.0, "red channel {}", px[0]);
            assert!(px[2] < 1.0 / 255.0, "blue bled in: {}", px[2]);
        }
        for fi in 2..4 {
            let t = tris[fi];
            let cu = (t[0][0] + t[1][0] + t[2][0]) / 3.0;
            let cv = (t[0][1] + t[1][1] + t[2][1]) / 3.0;
            let px = img.sample(cu, cv);
            assert!((px[2] - 1.0).abs() < 1.0 / 255.0);
            assert!(px[0] < 1.0 / 255.0);
        }
    }

    #[test]
    fn dilation_fills_the_gap_ring_with_border_colors() {
        let mesh = TriMesh::new(
            vec![Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let r = 64u32;
        let gap = 2u32;
        let uv = build_face_atlas(&mesh, r, gap).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<Vec3> = (0..200)
            .map(|_| {
                let (mut a, mut b) = (rng.random::<f64>(), rng.random::<f64>());
                if a + b > 1.0 {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                Vec3::new(2.0 * a, 2.0 * b, 0.0)
            })
            .collect();
        let colors = vec![[0.0, 1.0, 0.0]; pts.len()];
        let projections = project_points_to_mesh(&pts, &mesh).unwrap();
        let img = bake_texture(&mesh, &uv, &pts, &colors, &projections, 4, gap, r).unwrap();

        let tri = match &uv {
            UVMap::FacesUv(t) => t[0],
            _ => unreachable!(),
        };
        let centroid = [
            (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0 * r as f64,
            (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0 * r as f64,
        ];
        // March outward from a triangle corner past the boundary: the
        // first `gap` texels outside must carry the border color, texels
        // far outside stay black.
        let corner = [tri[0][0] * r as f64, tri[0][1] * r as f64];
        let dir = [corner[0] - centroid[0], corner[1] - centroid[1]];
        let len = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        let dir = [dir[0] / len, dir[1] / len];
        for step in 1..=gap as i32 {
            let x = corner[0] + dir[0] * step as f64;
            let ty = corner[1] + dir[1] * step as f64;
            let px = img.texel_uv(x as u32, ty as u32);
            assert!(
                (px[1] - 1.0).abs() < 1e-6,
                "ring texel at step {step} is {px:?}"
            );
        }
        let far = img.texel_uv(
            (corner[0] + dir[0] * 14.0) as u32,
            (corner[1] + dir[1] * 14.0) as u32,
        );
        assert_eq!(far, [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn bake_is_invariant_under_point_permutation() {
        let (v, f) = quad_mesh(Vec3::ZERO, 1.0);
        let mesh = TriMesh::new(v, f).unwrap();
        let r = 64u32;
        let uv = build_face_atlas(&mesh, r, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = scatter(Vec3::ZERO, 1.0, 120, &mut rng);
        let colors: Vec<[f64; 3]> = (0..120)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let projections = project_points_to_mesh(&pts, &mesh).unwrap();
        let img = bake_texture(&mesh, &uv, &pts, &colors, &projections, 4, 2, r).unwrap();

        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.shuffle(&mut rng);
        let pts2: Vec<Vec3> = order.iter().map(|&i| pts[i]).collect();
        let colors2: Vec<[f64; 3]> = order.iter().map(|&i| colors[i]).collect();
        let projections2 = project_points_to_mesh(&pts2, &mesh).unwrap();
        let img2 = bake_texture(&mesh, &uv, &pts2, &colors2, &projections2, 4, 2, r).unwrap();
        assert_eq!(img.pixels(), img2.pixels());
    }

    #[test]
    fn baking_with_no_points_is_an_error() {
        let (v, f) = quad_mesh(Vec3::ZERO, 1.0);
        let mesh = TriMesh::new(v, f).unwrap();
        let uv = build_face_atlas(&mesh, 64, 2).unwrap();
        assert!(matches!(
            bake_texture(&mesh, &uv, &[], &[], &[], 4, 2, 64),
            Err(Error::EmptyBake)
        ));
    }
}
