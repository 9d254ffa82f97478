//! Color sources, UV maps and materials.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math::Vec3;

/// Counts file-texture disk reads; lets tests observe that loading is lazy.
pub(crate) static FILE_TEXTURE_READS: AtomicUsize = AtomicUsize::new(0);

/// Texture coordinates, either one UV per vertex or one UV per face corner.
#[derive(Debug, Clone, PartialEq)]
pub enum UVMap {
    VertexUv(Vec<[f64; 2]>),
    FacesUv(Vec<[[f64; 2]; 3]>),
}

impl UVMap {
    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            UVMap::VertexUv(uv) => uv.iter().flatten().all(|c| c.is_finite()),
            UVMap::FacesUv(uv) => uv.iter().flatten().flatten().all(|c| c.is_finite()),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::ColorBind("UV map contains non-finite values".into()))
        }
    }

    /// UV coordinates at the three corners of `face`.
    pub fn face_corners(&self, faces: &[[u32; 3]], face: usize) -> Result<[[f64; 2]; 3]> {
        match self {
            UVMap::VertexUv(uv) => {
                let f = faces[face];
                for &vi in &f {
                    if vi as usize >= uv.len() {
                        return Err(Error::ColorBind(format!(
                            "vertex_uv has {} entries but face references vertex {}",
                            uv.len(),
                            vi
                        )));
                    }
                }
                Ok([uv[f[0] as usize], uv[f[1] as usize], uv[f[2] as usize]])
            }
            UVMap::FacesUv(uv) => uv.get(face).copied().ok_or_else(|| {
                Error::ColorBind(format!(
                    "faces_uv has {} entries but face {} was shaded",
                    uv.len(),
                    face
                ))
            }),
        }
    }
}

type TextureCache = Arc<OnceLock<std::result::Result<Image, String>>>;

/// Where a surface takes its base color from.
#[derive(Debug, Clone)]
pub enum ColorSource {
    Uniform([f64; 4]),
    PerVertex(Vec<[f64; 4]>),
    Texture {
        image: Image,
        uv: UVMap,
    },
    /// Texture read from disk on first use, not at scene-construction time.
    FileTexture {
        path: PathBuf,
        uv: UVMap,
        cache: TextureCache,
    },
}

fn check_channels(values: &[f64]) -> Result<()> {
    if values.iter().all(|c| (0.0..=1.0).contains(c)) {
        Ok(())
    } else {
        Err(Error::ColorBind(
            "color channels must lie in [0, 1]".into(),
        ))
    }
}

impl ColorSource {
    pub fn uniform_rgb(r: f64, g: f64, b: f64) -> Result<Self> {
        Self::uniform_rgba([r, g, b, 1.0])
    }

    pub fn uniform_rgba(rgba: [f64; 4]) -> Result<Self> {
        check_channels(&rgba)?;
        Ok(ColorSource::Uniform(rgba))
    }

    pub fn per_vertex_rgb(colors: Vec<[f64; 3]>) -> Result<Self> {
        let rgba: Vec<[f64; 4]> = colors.iter().map(|c| [c[0], c[1], c[2], 1.0]).collect();
        Self::per_vertex_rgba(rgba)
    }

    pub fn per_vertex_rgba(colors: Vec<[f64; 4]>) -> Result<Self> {
        for c in &colors {
            check_channels(c)?;
        }
        Ok(ColorSource::PerVertex(colors))
    }

    pub fn texture(image: Image, uv: UVMap) -> Result<Self> {
        uv.validate()?;
        Ok(ColorSource::Texture { image, uv })
    }

    pub fn file_texture(path: impl Into<PathBuf>, uv: UVMap) -> Result<Self> {
        uv.validate()?;
        Ok(ColorSource::FileTexture {
            path: path.into(),
            uv,
            cache: Arc::new(OnceLock::new()),
        })
    }

    /// Checks lengths against the geometry this source is bound to.
    pub fn bind_check(&self, n_vertices: usize, n_faces: usize) -> Result<()> {
        match self {
            ColorSource::Uniform(_) => Ok(()),
            ColorSource::PerVertex(colors) => {
                if colors.len() == n_vertices {
                    Ok(())
                } else {
                    Err(Error::ColorBind(format!(
                        "per-vertex colors have {} entries for {} vertices",
                        colors.len(),
                        n_vertices
                    )))
                }
            }
            ColorSource::Texture { uv, .. } | ColorSource::FileTexture { uv, .. } => match uv {
                UVMap::VertexUv(coords) => {
                    if coords.len() == n_vertices {
                        Ok(())
                    } else {
                        Err(Error::ColorBind(format!(
                            "vertex_uv has {} entries for {} vertices",
                            coords.len(),
                            n_vertices
                        )))
                    }
                }
                UVMap::FacesUv(coords) => {
                    if coords.len() == n_faces {
                        Ok(())
                    } else {
                        Err(Error::ColorBind(format!(
                            "faces_uv has {} entries for {} faces",
                            coords.len(),
                            n_faces
                        )))
                    }
                }
            },
        }
    }

    fn image(&self) -> Result<&Image> {
        match self {
            ColorSource::Texture { image, .. } => Ok(image),
            ColorSource::FileTexture { path, cache, .. } => {
                let loaded = cache.get_or_init(|| {
                    FILE_TEXTURE_READS.fetch_add(1, Ordering::SeqCst);
                    crate::io::png::read_png(path).map_err(|e| e.to_string())
                });
                loaded.as_ref().map_err(|msg| Error::Parse {
                    file: path.display().to_string(),
                    message: msg.clone(),
                })
            }
            _ => unreachable!("image() is only called for textured sources"),
        }
    }
}

/// Bilinear texture lookup; `uv` wraps with period 1 and `v = 0` addresses
/// the bottom row.
pub fn sample_texture(img: &Image, u: f64, v: f64) -> [f64; 4] {
    let s = img.sample(u, v);
    [s[0] as f64, s[1] as f64, s[2] as f64, s[3] as f64]
}

/// Evaluates `source` at a surface hit given by a face index and barycentric
/// coordinates over the face corners.
pub fn shade_color(
    vertices_len: usize,
    faces: &[[u32; 3]],
    face: usize,
    bary: [f64; 3],
    source: &ColorSource,
) -> Result<[f64; 4]> {
    match source {
        ColorSource::Uniform(rgba) => Ok(*rgba),
        ColorSource::PerVertex(colors) => {
            if colors.len() != vertices_len {
                return Err(Error::ColorBind(format!(
                    "per-vertex colors have {} entries for {} vertices",
                    colors.len(),
                    vertices_len
                )));
            }
            let f = faces[face];
            let mut out = [0.0; 4];
            for (w, vi) in bary.iter().zip(f.iter()) {
                let c = colors[*vi as usize];
                for k in 0..4 {
                    out[k] += w * c[k];
                }
            }
            Ok(out)
        }
        ColorSource::Texture { uv, .. } | ColorSource::FileTexture { uv, .. } => {
            let corners = uv.face_corners(faces, face)?;
            let mut u = 0.0;
            let mut v = 0.0;
            for (w, c) in bary.iter().zip(corners.iter()) {
                u += w * c[0];
                v += w * c[1];
            }
            Ok(sample_texture(source.image()?, u, v))
        }
    }
}

/// Surface reflectance model.
#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Principled {
        /// Multiplies the bound color before shading.
        base_modulation: [f64; 3],
        metallic: f64,
        roughness: f64,
        specular: f64,
        emission_color: [f64; 3],
        emission_strength: f64,
        alpha: f64,
    },
    Glossy {
        roughness: f64,
    },
    WireframeOverlay {
        base: Box<Material>,
        /// World-space wire thickness in meters.
        thickness: f64,
        wire_color: [f64; 3],
    },
}

impl Default for Material {
    fn default() -> Self {
        Material::Principled {
            base_modulation: [1.0, 1.0, 1.0],
            metallic: 0.0,
            roughness: 0.5,
            specular: 0.5,
            emission_color: [0.0, 0.0, 0.0],
            emission_strength: 0.0,
            alpha: 1.0,
        }
    }
}

impl Material {
    pub fn principled(metallic: f64, roughness: f64, specular: f64) -> Self {
        Material::Principled {
            base_modulation: [1.0, 1.0, 1.0],
            metallic,
            roughness,
            specular,
            emission_color: [0.0, 0.0, 0.0],
            emission_strength: 0.0,
            alpha: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match self {
            Material::Principled {
                base_modulation,
                metallic,
                roughness,
                specular,
                emission_color,
                emission_strength,
                alpha,
            } => {
                if !unit(*metallic) || !unit(*roughness) || !unit(*alpha) {
                    return Err(Error::ColorBind(
                        "metallic, roughness and alpha must lie in [0, 1]".into(),
                    ));
                }
                if !(*specular >= 0.0) || !(*emission_strength >= 0.0) {
                    return Err(Error::ColorBind(
                        "specular and emission_strength must be non-negative".into(),
                    ));
                }
                if base_modulation
                    .iter()
                    .chain(emission_color.iter())
                    .any(|c| !c.is_finite() || *c < 0.0)
                {
                    return Err(Error::ColorBind(
                        "base_modulation and emission_color must be non-negative".into(),
                    ));
                }
                Ok(())
            }
            Material::Glossy { roughness } => {
                if unit(*roughness) {
                    Ok(())
                } else {
                    Err(Error::ColorBind("roughness must lie in [0, 1]".into()))
                }
            }
            Material::WireframeOverlay {
                base,
                thickness,
                wire_color,
            } => {
                if matches!(**base, Material::WireframeOverlay { .. }) {
                    return Err(Error::ColorBind(
                        "wireframe overlay cannot wrap another wireframe overlay".into(),
                    ));
                }
                if !(*thickness > 0.0) {
                    return Err(Error::ColorBind("wire thickness must be positive".into()));
                }
                if wire_color.iter().any(|c| !unit(*c)) {
                    return Err(Error::ColorBind("wire color channels must lie in [0, 1]".into()));
                }
                base.validate()
            }
        }
    }

    /// The material shaded where the wireframe overlay does not apply.
    pub fn inner(&self) -> &Material {
        match self {
            Material::WireframeOverlay { base, .. } => base,
            other => other,
        }
    }
}

/// Named parameter bundles expanding to `Material::Principled`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialPreset {
    Metal,
    Plastic,
}

impl MaterialPreset {
    pub fn expand(self) -> Material {
        match self {
            MaterialPreset::Metal => Material::principled(1.0, 0.25, 0.5),
            MaterialPreset::Plastic => Material::principled(0.0, 0.4, 0.5),
        }
    }
}

/// A color source paired with the material that shades it.
#[derive(Debug, Clone)]
pub struct Appearance {
    pub colors: ColorSource,
    pub material: Material,
}

impl Default for Appearance {
    fn default() -> Self {
        Appearance {
            colors: ColorSource::Uniform([0.8, 0.8, 0.8, 1.0]),
            material: Material::default(),
        }
    }
}

impl Appearance {
    pub fn new(colors: ColorSource, material: Material) -> Result<Self> {
        material.validate()?;
        Ok(Appearance { colors, material })
    }
}

/// 1 when the world-space hit point lies within `thickness / 2` of any edge
/// of its triangle, 0 otherwise.
pub fn wireframe_factor(
    vertices: &[Vec3],
    faces: &[[u32; 3]],
    face: usize,
    bary: [f64; 3],
    thickness: f64,
) -> f64 {
    let f = faces[face];
    let a = vertices[f[0] as usize];
    let b = vertices[f[1] as usize];
    let c = vertices[f[2] as usize];
    let p = a * bary[0] + b * bary[1] + c * bary[2];
    let d = point_segment_distance(p, a, b)
        .min(point_segment_distance(p, b, c))
        .min(point_segment_distance(p, c, a));
    if d <= thickness * 0.5 {
        1.0
    } else {
        0.0
    }
}

fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return (p - a).length();
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_triangle() -> (Vec<Vec3>, Vec<[u32; 3]>) {
        (
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
    }

    #[test]
    fn uniform_color_is_constant() {
        let (v, f) = unit_triangle();
        let src = ColorSource::uniform_rgb(0.2, 0.4, 0.6).unwrap();
        let c = shade_color(v.len(), &f, 0, [0.1, 0.3, 0.6], &src).unwrap();
        assert_eq!(c, [0.2, 0.4, 0.6, 1.0]);
    }

    #[test]
    fn per_vertex_barycenter_blends_equally() {
        let (v, f) = unit_triangle();
        let src = ColorSource::per_vertex_rgb(vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let third = 1.0 / 3.0;
        let c = shade_color(v.len(), &f, 0, [third, third, third], &src).unwrap();
        for k in 0..3 {
            assert_relative_eq!(c[k], third, max_relative = 1e-12);
        }
    }

    #[test]
    fn per_vertex_at_vertex_zero_is_exact() {
        let (v, f) = unit_triangle();
        let src = ColorSource::per_vertex_rgb(vec![
            [0.9, 0.1, 0.3],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let c = shade_color(v.len(), &f, 0, [1.0, 0.0, 0.0], &src).unwrap();
        assert_eq!(c, [0.9, 0.1, 0.3, 1.0]);
    }

    #[test]
    fn per_vertex_length_mismatch_is_a_bind_error() {
        let (v, f) = unit_triangle();
        let src = ColorSource::per_vertex_rgb(vec![[1.0, 0.0, 0.0]]).unwrap();
        let err = shade_color(v.len(), &f, 0, [1.0, 0.0, 0.0], &src).unwrap_err();
        assert!(matches!(err, Error::ColorBind(_)));
    }

    #[test]
    fn shade_color_is_invariant_under_corner_permutation() {
        let (v, f) = unit_triangle();
        let colors = vec![[0.9, 0.1, 0.3], [0.2, 0.7, 0.5], [0.0, 0.0, 1.0]];
        let src = ColorSource::per_vertex_rgb(colors.clone()).unwrap();
        let bary = [0.5, 0.3, 0.2];
        let base = shade_color(v.len(), &f, 0, bary, &src).unwrap();

        let f_perm = vec![[f[0][1], f[0][2], f[0][0]]];
        let bary_perm = [bary[1], bary[2], bary[0]];
        let perm = shade_color(v.len(), &f_perm, 0, bary_perm, &src).unwrap();
        for k in 0..4 {
            assert_relative_eq!(base[k], perm[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn checker_texture_center_hit_is_bilinear_mean() {
        // 2x2 checker: white/black on the bottom row, black/white on top.
        let img = Image::new(
            2,
            2,
            vec![
                [0.0, 0.0, 0.0, 1.0],
                [1.0, 1.0, 1.0, 1.0],
                [1.0, 1.0, 1.0, 1.0],
                [0.0, 0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        let uv = UVMap::VertexUv(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let src = ColorSource::texture(img, uv).unwrap();
        let (v, f) = unit_triangle();
        // Barycentric weights putting the UV sample at the quad center.
        let c = shade_color(v.len(), &f, 0, [0.0, 0.5, 0.5], &src).unwrap();
        for k in 0..3 {
            assert_relative_eq!(c[k], 0.5, max_relative = 1e-6);
        }
    }

    #[test]
    fn file_texture_is_not_read_before_first_shading_query() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tex.png");
        let img = Image::filled(2, 2, [1.0, 0.0, 0.0, 1.0]).unwrap();
        crate::io::png::write_png(&img, &path).unwrap();

        let before = FILE_TEXTURE_READS.load(Ordering::SeqCst);
        let uv = UVMap::VertexUv(vec![[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]]);
        let src = ColorSource::file_texture(&path, uv).unwrap();
        let (v, f) = unit_triangle();
        assert_eq!(FILE_TEXTURE_READS.load(Ordering::SeqCst), before);

        let c = shade_color(v.len(), &f, 0, [1.0, 0.0, 0.0], &src).unwrap();
        assert!(c[0] > 0.9 && c[1] < 0.1);
        assert_eq!(FILE_TEXTURE_READS.load(Ordering::SeqCst), before + 1);

        shade_color(v.len(), &f, 0, [0.0, 1.0, 0.0], &src).unwrap();
        assert_eq!(FILE_TEXTURE_READS.load(Ordering::SeqCst), before + 1);
    }

    #[test]
    fn missing_texture_file_errors_at_first_access() {
        let uv = UVMap::VertexUv(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let src = ColorSource::file_texture("/nonexistent/tex.png", uv).unwrap();
        let (v, f) = unit_triangle();
        assert!(shade_color(v.len(), &f, 0, [1.0, 0.0, 0.0], &src).is_err());
    }

    #[test]
    fn wireframe_factor_on_edge_and_at_centroid() {
        // Equilateral triangle with side 1.
        let h = 3.0f64.sqrt() / 2.0;
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, h, 0.0),
        ];
        let f = vec![[0u32, 1, 2]];
        assert_eq!(wireframe_factor(&v, &f, 0, [0.5, 0.5, 0.0], 0.1), 1.0);
        let third = 1.0 / 3.0;
        // Centroid edge distance is 1/(2*sqrt(3)) ~ 0.2887 > 0.05.
        assert_eq!(wireframe_factor(&v, &f, 0, [third, third, third], 0.1), 0.0);
        // Thickness at least twice the inradius covers the whole face.
        let inradius = 1.0 / (2.0 * 3.0f64.sqrt());
        assert_eq!(
            wireframe_factor(&v, &f, 0, [third, third, third], 2.0 * inradius + 1e-12),
            1.0
        );
    }

    #[test]
    fn presets_expand_to_documented_parameters() {
        match MaterialPreset::Metal.expand() {
            Material::Principled {
                metallic, roughness, ..
            } => {
                assert_eq!(metallic, 1.0);
                assert_eq!(roughness, 0.25);
            }
            _ => panic!("metal preset must be principled"),
        }
        match MaterialPreset::Plastic.expand() {
            Material::Principled {
                metallic,
                roughness,
                specular,
                ..
            } => {
                assert_eq!(metallic, 0.0);
                assert_eq!(roughness, 0.4);
                assert_eq!(specular, 0.5);
            }
            _ => panic!("plastic preset must be principled"),
        }
    }

    #[test]
    fn nested_wireframe_overlay_is_rejected() {
        let inner = Material::WireframeOverlay {
            base: Box::new(Material::default()),
            thickness: 0.01,
            wire_color: [0.0, 0.0, 0.0],
        };
        let outer = Material::WireframeOverlay {
            base: Box::new(inner),
            thickness: 0.01,
            wire_color: [0.0, 0.0, 0.0],
        };
        assert!(outer.validate().is_err());
    }
}
