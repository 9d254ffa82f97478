//! Light sources and direct-illumination sampling.
//!
//! Units: point and spot lights take `strength` in watts (intensity
//! strength/(4*pi) W/sr); directional lights in W/m^2 of irradiance on a
//! facing surface; area lights in W/m^2 of radiant exitance (Lambertian
//! radiance strength/pi); background strength is radiance directly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{Pose, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaShape {
    Square,
    Disc,
}

#[derive(Debug, Clone)]
pub enum Light {
    Background {
        color: [f64; 3],
        strength: f64,
    },
    Point {
        color: [f64; 3],
        strength: f64,
        /// Emitter sphere radius; zero gives hard shadows.
        radius: f64,
        cast_shadow: bool,
        pose: Pose,
    },
    Directional {
        color: [f64; 3],
        strength: f64,
        /// Angular size of the source disc; zero gives hard shadows.
        angular_diameter: f64,
        cast_shadow: bool,
        pose: Pose,
    },
    Spot {
        color: [f64; 3],
        strength: f64,
        /// Half-angle of the cone, measured from the axis.
        cone_angle: f64,
        /// Fraction of the cone over which intensity falls to zero.
        blend: f64,
        cast_shadow: bool,
        pose: Pose,
    },
    Area {
        color: [f64; 3],
        strength: f64,
        shape: AreaShape,
        /// Square side length or disc diameter.
        size: f64,
        cast_shadow: bool,
        pose: Pose,
    },
}

impl Light {
    pub fn validate(&self) -> Result<()> {
        let check_color = |c: &[f64; 3]| {
            if c.iter().all(|v| v.is_finite() && *v >= 0.0) {
                Ok(())
            } else {
                Err(Error::InvalidLight("color channels must be >= 0".into()))
            }
        };
        match self {
            Light::Background { color, strength } => {
                check_color(color)?;
                finite_nonneg("strength", *strength)
            }
            Light::Point {
                color,
                strength,
                radius,
                ..
            } => {
                check_color(color)?;
                finite_nonneg("strength", *strength)?;
                finite_nonneg("radius", *radius)
            }
            Light::Directional {
                color,
                strength,
                angular_diameter,
                ..
            } => {
                check_color(color)?;
                finite_nonneg("strength", *strength)?;
                finite_nonneg("angular_diameter", *angular_diameter)
            }
            Light::Spot {
                color,
                strength,
                cone_angle,
                blend,
                ..
            } => {
                check_color(color)?;
                finite_nonneg("strength", *strength)?;
                if !(*cone_angle > 0.0 && *cone_angle < std::f64::consts::PI) {
                    return Err(Error::InvalidLight(
                        "cone_angle must lie in (0, pi)".into(),
                    ));
                }
                if !(0.0..=1.0).contains(blend) {
                    return Err(Error::InvalidLight("blend must lie in [0, 1]".into()));
                }
                Ok(())
            }
            Light::Area {
                color,
                strength,
                size,
                ..
            } => {
                check_color(color)?;
                finite_nonneg("strength", *strength)?;
                if *size > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLight("area size must be positive".into()))
                }
            }
        }
    }

    pub fn cast_shadow(&self) -> bool {
        match self {
            Light::Background { .. } => true,
            Light::Point { cast_shadow, .. }
            | Light::Directional { cast_shadow, .. }
            | Light::Spot { cast_shadow, .. }
            | Light::Area { cast_shadow, .. } => *cast_shadow,
        }
    }

    /// Environment radiance carried by rays that escape the scene.
    pub fn background_radiance(&self) -> Option<[f64; 3]> {
        match self {
            Light::Background { color, strength } => {
                Some([color[0] * strength, color[1] * strength, color[2] * strength])
            }
            _ => None,
        }
    }
}

/// One direct-lighting sample.
#[derive(Debug, Clone, Copy)]
pub struct LightSample {
    /// Unit direction from the shading point toward the light, used for
    /// BSDF evaluation.
    pub direction: Vec3,
    /// Radiance divided by the sampling pdf; multiply by f * cos.
    pub weight: [f64; 3],
    pub needs_shadow_ray: bool,
    /// Occlusion test ray; differs from `direction` only for finite-size
    /// emitters, which jitter the shadow target for soft shadows.
    pub shadow_dir: Vec3,
    /// Length of the occlusion segment (infinite for directional sources).
    pub shadow_distance: f64,
    /// Solid-angle pdf when the light is also reachable by BSDF rays
    /// (area lights); drives multiple importance sampling.
    pub pdf_solid_angle: Option<f64>,
}

fn finite_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLight(format!("{name} must be finite and >= 0")))
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Spot falloff factor: 1 inside `cone_angle * (1 - blend)`, smoothstep to
/// 0 at `cone_angle`.
pub fn spot_falloff(cone_angle: f64, blend: f64, theta: f64) -> f64 {
    let inner = cone_angle * (1.0 - blend);
    if theta >= cone_angle {
        0.0
    } else if theta <= inner {
        1.0
    } else {
        smoothstep((cone_angle - theta) / (cone_angle - inner))
    }
}

fn uniform_sphere_point(rng: &mut impl Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn cone_direction(axis: Vec3, half_angle: f64, rng: &mut impl Rng) -> Vec3 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let cos_max = half_angle.cos();
    let cos_t = 1.0 - u * (1.0 - cos_max);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = std::f64::consts::TAU * v;
    let t = if axis.z.abs() < 0.999 {
        Vec3::Z.cross(axis).normalized()
    } else {
        Vec3::X.cross(axis).normalized()
    };
    let b = axis.cross(t);
    (t * (sin_t * phi.cos()) + b * (sin_t * phi.sin()) + axis * cos_t).normalized()
}

/// Forward axis (local -Z) of a posed light.
fn forward(pose: &Pose) -> Vec3 {
    pose.rotation.rotate(Vec3::new(0.0, 0.0, -1.0))
}

/// Samples the light's direct contribution at `point`. Returns `None` when
/// the light cannot contribute there (outside a spot cone, behind an area
/// light, or a background light, which is integrated by path escape
/// instead).
pub fn sample_direct(light: &Light, point: Vec3, rng: &mut impl Rng) -> Option<LightSample> {
    match light {
        Light::Background { .. } => None,
        Light::Point {
            color,
            strength,
            radius,
            cast_shadow,
            pose,
        } => {
            let to_light = pose.position - point;
            let d2 = to_light.length_squared();
            if d2 <= 1e-18 {
                return None;
            }
            let distance = d2.sqrt();
            let direction = to_light * (1.0 / distance);
            let intensity = strength / (4.0 * std::f64::consts::PI);
            let weight = scale(color, intensity / d2);
            let (shadow_dir, shadow_distance) = if *radius > 0.0 {
                let q = pose.position + uniform_sphere_point(rng) * *radius;
                let seg = q - point;
                let len = seg.length();
                (seg * (1.0 / len), len)
            } else {
                (direction, distance)
            };
            Some(LightSample {
                direction,
                weight,
                needs_shadow_ray: *cast_shadow,
                shadow_dir,
                shadow_distance,
                pdf_solid_angle: None,
            })
        }
        Light::Spot {
            color,
            strength,
            cone_angle,
            blend,
            cast_shadow,
            pose,
        } => {
            let to_light = pose.position - point;
            let d2 = to_light.length_squared();
            if d2 <= 1e-18 {
                return None;
            }
            let distance = d2.sqrt();
            let direction = to_light * (1.0 / distance);
            let axis = forward(pose);
            let cos_theta = axis.dot(direction * -1.0).clamp(-1.0, 1.0);
            let falloff = spot_falloff(*cone_angle, *blend, cos_theta.acos());
            if falloff <= 0.0 {
                return None;
            }
            let intensity = strength / (4.0 * std::f64::consts::PI) * falloff;
            Some(LightSample {
                direction,
                weight: scale(color, intensity / d2),
                needs_shadow_ray: *cast_shadow,
                shadow_dir: direction,
                shadow_distance: distance,
                pdf_solid_angle: None,
            })
        }
        Light::Directional {
            color,
            strength,
            angular_diameter,
            cast_shadow,
            pose,
        } => {
            let direction = forward(pose) * -1.0;
            let shadow_dir = if *angular_diameter > 0.0 {
                cone_direction(direction, angular_diameter / 2.0, rng)
            } else {
                direction
            };
            Some(LightSample {
                direction,
                weight: scale(color, *strength),
                needs_shadow_ray: *cast_shadow,
                shadow_dir,
                shadow_distance: f64::INFINITY,
                pdf_solid_angle: None,
            })
        }
        Light::Area {
            color,
            strength,
            shape,
            size,
            cast_shadow,
            pose,
        } => {
            let (local, area) = match shape {
                AreaShape::Square => {
                    let u: f64 = rng.random();
                    let v: f64 = rng.random();
                    (
                        Vec3::new((u - 0.5) * size, (v - 0.5) * size, 0.0),
                        size * size,
                    )
                }
                AreaShape::Disc => {
                    let u: f64 = rng.random();
                    let v: f64 = rng.random();
                    let r = (size / 2.0) * u.sqrt();
                    let phi = std::f64::consts::TAU * v;
                    (
                        Vec3::new(r * phi.cos(), r * phi.sin(), 0.0),
                        std::f64::consts::PI * (size / 2.0) * (size / 2.0),
                    )
                }
            };
            let q = pose.transform_point(local);
            let seg = q - point;
            let d2 = seg.length_squared();
            if d2 <= 1e-18 {
                return None;
            }
            let distance = d2.sqrt();
            let direction = seg * (1.0 / distance);
            let cos_light = forward(pose).dot(direction * -1.0);
            if cos_light <= 0.0 {
                return None;
            }
            let radiance = strength / std::f64::consts::PI;
            let geom = area * cos_light / d2;
            Some(LightSample {
                direction,
                weight: scale(color, radiance * geom),
                needs_shadow_ray: *cast_shadow,
                shadow_dir: direction,
                shadow_distance: distance,
                pdf_solid_angle: Some(d2 / (area * cos_light)),
            })
        }
    }
}

/// Intersection of a ray with an area light's emissive face, for BSDF-ray
/// MIS accounting. Returns (distance, emitted radiance, solid-angle pdf of
/// `sample_direct` hitting that point).
pub fn intersect_area_light(
    light: &Light,
    origin: Vec3,
    dir: Vec3,
) -> Option<(f64, [f64; 3], f64)> {
    let Light::Area {
        color,
        strength,
        shape,
        size,
        pose,
        ..
    } = light
    else {
        return None;
    };
    let normal = forward(pose);
    let denom = normal.dot(dir);
    // Only rays hitting the emissive (-Z) face count.
    if denom >= -1e-12 {
        return None;
    }
    let t = normal.dot(pose.position - origin) / denom;
    if t <= 1e-9 {
        return None;
    }
    let hit = origin + dir * t;
    let local = pose.inverse_transform_point(hit);
    let inside = match shape {
        AreaShape::Square => local.x.abs() <= size / 2.0 && local.y.abs() <= size / 2.0,
        AreaShape::Disc => (local.x * local.x + local.y * local.y).sqrt() <= size / 2.0,
    };
    if !inside {
        return None;
    }
    let area = match shape {
        AreaShape::Square => size * size,
        AreaShape::Disc => std::f64::consts::PI * (size / 2.0) * (size / 2.0),
    };
    let radiance = scale(color, strength / std::f64::consts::PI);
    let cos_light = -denom;
    let pdf_sa = (t * t) / (area * cos_light);
    Some((t, radiance, pdf_sa))
}

fn scale(color: &[f64; 3], s: f64) -> [f64; 3] {
    [color[0] * s, color[1] * s, color[2] * s]
}
