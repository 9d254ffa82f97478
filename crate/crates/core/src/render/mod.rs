//! Deterministic path-tracing renderer with color, depth, albedo and alpha
//! passes.
//!
//! Light transport is next-event estimation at every bounce plus BSDF
//! continuation, with power-heuristic multiple importance sampling against
//! area lights and Russian roulette from the third bounce. Determinism
//! comes from keying a random stream per (seed, pixel, sample), never from
//! scheduling.

mod bvh;
mod intersect;
mod sampler;
mod world;

pub(crate) use bvh::Bvh;
pub(crate) use intersect::Aabb;

use rand::Rng;
use rayon::prelude::*;

use crate::bsdf::{eval_bsdf, pdf_bsdf, sample_bsdf};
use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::io::png::encode_srgb8;
use crate::light::{intersect_area_light, sample_direct};
use crate::math::Vec3;
use crate::scene::{RenderSettings, Scene};
use sampler::pixel_rng;
use world::{Shading, World, T_MIN};

const TILE: u32 = 32;
/// Path steps (hits, including alpha pass-throughs) before forced
/// termination.
const MAX_STEPS: u32 = 256;

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub width: u32,
    pub height: u32,
    /// Tone-mapped sRGB color with coverage alpha.
    pub color: Vec<[u8; 4]>,
    /// Linear radiance before tone mapping.
    pub color_linear: Vec<[f64; 3]>,
    /// Coverage in [0, 1]; shadow catchers report shadow density.
    pub alpha: Vec<f64>,
    /// Primary-hit distance in meters; 0.0 encodes a miss.
    pub depth: Vec<f64>,
    /// Unlit sRGB color of the primary hit.
    pub albedo: Vec<[u8; 3]>,
}

/// Clamps to [0, 1], applies the sRGB transfer, rounds half away from
/// zero.
pub fn tone_map(rgb: [f64; 3]) -> [u8; 3] {
    [
        encode_srgb8(rgb[0]),
        encode_srgb8(rgb[1]),
        encode_srgb8(rgb[2]),
    ]
}

pub fn render(scene: &Scene, settings: &RenderSettings) -> Result<RenderOutput> {
    settings.validate()?;
    let camera = scene.require_camera()?;
    let (width, height) = settings.resolution;
    if (camera.width, camera.height) != (width, height) {
        return Err(Error::InvalidSettings(format!(
            "camera resolution {}x{} does not match render resolution {}x{}",
            camera.width, camera.height, width, height
        )));
    }
    let world = World::build(scene)?;

    let mut tiles = Vec::new();
    for ty in (0..height).step_by(TILE as usize) {
        for tx in (0..width).step_by(TILE as usize) {
            tiles.push((tx, ty));
        }
    }

    let tile_results: Vec<TileResult> = tiles
        .par_iter()
        .map(|&(tx, ty)| render_tile(&world, camera, settings, tx, ty))
        .collect::<Result<_>>()?;

    let n = (width * height) as usize;
    let mut out = RenderOutput {
        width,
        height,
        color: vec![[0, 0, 0, 0]; n],
        color_linear: vec![[0.0; 3]; n],
        alpha: vec![0.0; n],
        depth: vec![0.0; n],
        albedo: vec![[0, 0, 0]; n],
    };
    for tile in tile_results {
        let mut k = 0;
        for j in tile.y0..tile.y1 {
            for i in tile.x0..tile.x1 {
                let idx = (j * width + i) as usize;
                out.color[idx] = tile.color[k];
                out.color_linear[idx] = tile.color_linear[k];
                out.alpha[idx] = tile.alpha[k];
                out.depth[idx] = tile.depth[k];
                out.albedo[idx] = tile.albedo[k];
                k += 1;
            }
        }
    }
    Ok(out)
}

struct TileResult {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
    color: Vec<[u8; 4]>,
    color_linear: Vec<[f64; 3]>,
    alpha: Vec<f64>,
    depth: Vec<f64>,
    albedo: Vec<[u8; 3]>,
}

fn render_tile(
    world: &World<'_>,
    camera: &Camera,
    settings: &RenderSettings,
    tx: u32,
    ty: u32,
) -> Result<TileResult> {
    let (width, height) = settings.resolution;
    let x1 = (tx + TILE).min(width);
    let y1 = (ty + TILE).min(height);
    let mut tile = TileResult {
        x0: tx,
        y0: ty,
        x1,
        y1,
        color: Vec::new(),
        color_linear: Vec::new(),
        alpha: Vec::new(),
        depth: Vec::new(),
        albedo: Vec::new(),
    };
    let spp = settings.samples_per_pixel;
    for j in ty..y1 {
        for i in tx..x1 {
            let pixel_index = (j * width + i) as u64;

            let (mut linear, mut alpha) = ([0.0f64; 3], 0.0f64);
            if settings.passes.color {
                for s in 0..spp {
                    let mut rng = pixel_rng(settings.seed, pixel_index, s as u64);
                    let ju: f64 = rng.random();
                    let jv: f64 = rng.random();
                    let ray = camera.generate_ray(i, j, ju, jv)?;
                    let (radiance, a) =
                        trace_sample(world, ray.origin, ray.dir, settings, &mut rng)?;
                    for (acc, v) in linear.iter_mut().zip(radiance) {
                        *acc += v;
                    }
                    alpha += a;
                }
                let inv = 1.0 / spp as f64;
                for v in &mut linear {
                    *v *= inv;
                }
                alpha *= inv;
            }

            let (mut depth, mut albedo) = (0.0f64, [0u8; 3]);
            if settings.passes.depth || settings.passes.albedo {
                let ray = camera.generate_ray(i, j, 0.5, 0.5)?;
                if let Some(hit) = world.intersect(ray.origin, ray.dir, T_MIN, f64::INFINITY, false)
                {
                    depth = hit.t;
                    if settings.passes.albedo {
                        let sh = world.shading(&hit, ray.origin, ray.dir)?;
                        albedo = tone_map(sh.base_rgb);
                    }
                }
                if !settings.passes.depth {
                    depth = 0.0;
                }
            }

            let rgb = tone_map(linear);
            tile.color.push([
                rgb[0],
                rgb[1],
                rgb[2],
                (alpha.clamp(0.0, 1.0) * 255.0).round() as u8,
            ]);
            tile.color_linear.push(linear);
            tile.alpha.push(alpha);
            tile.depth.push(depth);
            tile.albedo.push(albedo);
        }
    }
    Ok(tile)
}

/// Nudges a ray origin off a surface, toward the side `dir` points into.
fn offset_origin(p: Vec3, n_geom: Vec3, dir: Vec3) -> Vec3 {
    let s = if n_geom.dot(dir) >= 0.0 { 1e-7 } else { -1e-7 };
    p + n_geom * s
}

fn trace_sample(
    world: &World<'_>,
    mut origin: Vec3,
    mut dir: Vec3,
    settings: &RenderSettings,
    rng: &mut impl Rng,
) -> Result<([f64; 3], f64)> {
    let mut radiance = [0.0f64; 3];
    let mut throughput = [1.0f64; 3];
    let mut alpha = 0.0f64;
    let mut primary = true;
    let mut scatters = 0u32;
    // pdf and origin of the last BSDF scatter, for MIS against area lights.
    let mut last_scatter: Option<(f64, Vec3)> = None;

    for _ in 0..MAX_STEPS {
        let hit = world.intersect(origin, dir, T_MIN, f64::INFINITY, primary);
        let t_hit = hit.as_ref().map_or(f64::INFINITY, |h| h.t);

        // Scattered rays see area lights; emitters are transparent, so any
        // light in front of the hit contributes.
        if let Some((pdf_b, scatter_origin)) = last_scatter {
            for light in &world.area_mis_lights {
                let visible = matches!(
                    intersect_area_light(light, origin, dir),
                    Some((t, _, _)) if t < t_hit
                );
                if !visible {
                    continue;
                }
                if let Some((_, emitted, pdf_l)) =
                    intersect_area_light(light, scatter_origin, dir)
                {
                    let w = pdf_b * pdf_b / (pdf_b * pdf_b + pdf_l * pdf_l);
                    for (acc, (tp, e)) in radiance.iter_mut().zip(throughput.iter().zip(emitted)) {
                        *acc += tp * e * w;
                    }
                }
            }
        }

        let Some(hit) = hit else {
            for (acc, (tp, bg)) in radiance
                .iter_mut()
                .zip(throughput.iter().zip(world.background))
            {
                *acc += tp * bg;
            }
            break;
        };

        let sh = world.shading(&hit, origin, dir)?;

        if sh.catcher {
            // Reachable by primary rays only.
            let (color, shadow) = shade_catcher(world, &sh, rng)?;
            for (acc, (tp, c)) in radiance.iter_mut().zip(throughput.iter().zip(color)) {
                *acc += tp * c;
            }
            alpha = (shadow[0] + shadow[1] + shadow[2]) / 3.0;
            break;
        }

        if sh.opacity < 1.0 && rng.random::<f64>() >= sh.opacity {
            origin = offset_origin(sh.point, sh.n_geom, dir);
            continue;
        }

        if primary {
            alpha = 1.0;
            primary = false;
        }
        let wo = -dir;

        for (acc, (tp, e)) in radiance.iter_mut().zip(throughput.iter().zip(sh.emission)) {
            *acc += tp * e;
        }

        direct_light(world, &sh, wo, rng, |f, mis| {
            for (acc, (tp, fv)) in radiance.iter_mut().zip(throughput.iter().zip(f)) {
                *acc += tp * fv * mis;
            }
            Ok(())
        })?;

        if scatters >= settings.max_bounces {
            break;
        }
        let Some(bs) = sample_bsdf(sh.material, sh.n_shade, wo, sh.base_rgb, rng) else {
            break;
        };
        for (tp, w) in throughput.iter_mut().zip(bs.weight) {
            *tp *= w;
        }
        scatters += 1;
        if scatters >= 3 {
            let p = throughput
                .iter()
                .fold(0.0f64, |a, b| a.max(*b))
                .clamp(0.05, 0.95);
            if rng.random::<f64>() >= p {
                break;
            }
            for tp in &mut throughput {
                *tp /= p;
            }
        }
        last_scatter = Some((bs.pdf, sh.point));
        origin = offset_origin(sh.point, sh.n_geom, bs.wi);
        dir = bs.wi;
    }

    Ok((radiance, alpha))
}

/// Runs next-event estimation at a shading point, handing each light's
/// weighted contribution (f * cos * L/pdf * visibility) and MIS factor to
/// `add`.
fn direct_light(
    world: &World<'_>,
    sh: &Shading<'_>,
    wo: Vec3,
    rng: &mut impl Rng,
    mut add: impl FnMut([f64; 3], f64) -> Result<()>,
) -> Result<()> {
    for light in &world.lights {
        let Some(ls) = sample_direct(light, sh.point, rng) else {
            continue;
        };
        let cos_i = sh.n_shade.dot(ls.direction);
        if cos_i <= 0.0 {
            continue;
        }
        let f = eval_bsdf(sh.material, sh.n_shade, wo, ls.direction, sh.base_rgb);
        if f.iter().all(|v| *v == 0.0) {
            continue;
        }
        let visibility = if ls.needs_shadow_ray {
            world.transmittance(
                offset_origin(sh.point, sh.n_geom, ls.shadow_dir),
                ls.shadow_dir,
                ls.shadow_distance - 1e-6,
            )?
        } else {
            1.0
        };
        if visibility <= 0.0 {
            continue;
        }
        // BSDF rays can also reach shadow-casting area lights; weight the
        // two estimators with the power heuristic. All other lights are
        // sampled here exclusively.
        let mis = match (ls.pdf_solid_angle, light.cast_shadow()) {
            (Some(pdf_l), true) => {
                let pdf_b = pdf_bsdf(sh.material, sh.n_shade, wo, ls.direction, sh.base_rgb);
                pdf_l * pdf_l / (pdf_l * pdf_l + pdf_b * pdf_b)
            }
            _ => 1.0,
        };
        let contribution = [
            f[0] * cos_i * ls.weight[0] * visibility,
            f[1] * cos_i * ls.weight[1] * visibility,
            f[2] * cos_i * ls.weight[2] * visibility,
        ];
        add(contribution, mis)?;
    }
    Ok(())
}

fn cosine_hemisphere(n: Vec3, rng: &mut impl Rng) -> Vec3 {
    let t = if n.z.abs() < 0.999 {
        Vec3::Z.cross(n).normalized()
    } else {
        Vec3::X.cross(n).normalized()
    };
    let b = n.cross(t);
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let r = u1.sqrt();
    let phi = std::f64::consts::TAU * u2;
    let z = (1.0 - u1).max(0.0).sqrt();
    t * (r * phi.cos()) + b * (r * phi.sin()) + n * z
}

/// Shadow-catcher estimate at a primary hit: direct light with and without
/// occluders from one correlated set of samples. Returns the composited
/// color `background * (1 - s)` and the shadow factor `s` per channel.
fn shade_catcher(
    world: &World<'_>,
    sh: &Shading<'_>,
    rng: &mut impl Rng,
) -> Result<([f64; 3], [f64; 3])> {
    let mut occluded = [0.0f64; 3];
    let mut free = [0.0f64; 3];

    for light in &world.lights {
        let Some(ls) = sample_direct(light, sh.point, rng) else {
            continue;
        };
        let cos_i = sh.n_shade.dot(ls.direction);
        if cos_i <= 0.0 {
            continue;
        }
        let visibility = if ls.needs_shadow_ray {
            world.transmittance(
                offset_origin(sh.point, sh.n_geom, ls.shadow_dir),
                ls.shadow_dir,
                ls.shadow_distance - 1e-6,
            )?
        } else {
            1.0
        };
        for ((fr, oc), w) in free.iter_mut().zip(occluded.iter_mut()).zip(ls.weight) {
            let c = w * cos_i;
            *fr += c;
            *oc += c * visibility;
        }
    }

    if world.has_background() {
        let wi = cosine_hemisphere(sh.n_shade, rng);
        let visibility =
            world.transmittance(offset_origin(sh.point, sh.n_geom, wi), wi, f64::INFINITY)?;
        for ((fr, oc), bg) in free.iter_mut().zip(occluded.iter_mut()).zip(world.background) {
            let c = bg * std::f64::consts::PI;
            *fr += c;
            *oc += c * visibility;
        }
    }

    let mut shadow = [0.0f64; 3];
    let mut color = [0.0f64; 3];
    for k in 0..3 {
        shadow[k] = if free[k] > 0.0 {
            (1.0 - occluded[k] / free[k]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        color[k] = world.background[k] * (1.0 - shadow[k]);
    }
    Ok((color, shadow))
}
