//! Ray-primitive intersection kernels and axis-aligned boxes.

use crate::math::Vec3;

/// Moller-Trumbore. Returns `(t, u, v)` with `u`, `v` the barycentric
/// weights of `b` and `c`; accepts hits with `t` in `(t_min, t_max)`.
pub fn ray_triangle(
    origin: Vec3,
    dir: Vec3,
    a: Vec3,
    b: Vec3,
    c: Vec3,
    t_min: f64,
    t_max: f64,
) -> Option<(f64, f64, f64)> {
    const BARY_EPS: f64 = 1e-12;
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(e2);
    let det = e1.dot(pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(pvec) * inv_det;
    if u < -BARY_EPS || u > 1.0 + BARY_EPS {
        return None;
    }
    let qvec = tvec.cross(e1);
    let v = dir.dot(qvec) * inv_det;
    if v < -BARY_EPS || u + v > 1.0 + BARY_EPS {
        return None;
    }
    let t = e2.dot(qvec) * inv_det;
    if t <= t_min || t >= t_max {
        return None;
    }
    Some((t, u.clamp(0.0, 1.0), v.clamp(0.0, 1.0)))
}

/// Nearest sphere intersection with `t` in `(t_min, t_max)`.
pub fn ray_sphere(
    origin: Vec3,
    dir: Vec3,
    center: Vec3,
    radius: f64,
    t_min: f64,
    t_max: f64,
) -> Option<f64> {
    let oc = origin - center;
    let b = oc.dot(dir);
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = -b - sq;
    if t0 > t_min && t0 < t_max {
        return Some(t0);
    }
    let t1 = -b + sq;
    if t1 > t_min && t1 < t_max {
        return Some(t1);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        lo: Vec3 {
            x: f64::INFINITY,
            y: f64::INFINITY,
            z: f64::INFINITY,
        },
        hi: Vec3 {
            x: f64::NEG_INFINITY,
            y: f64::NEG_INFINITY,
            z: f64::NEG_INFINITY,
        },
    };

    pub fn of_points(points: &[Vec3]) -> Aabb {
        points.iter().fold(Aabb::EMPTY, |acc, p| acc.grown(*p))
    }

    pub fn grown(self, p: Vec3) -> Aabb {
        Aabb {
            lo: self.lo.min(p),
            hi: self.hi.max(p),
        }
    }

    pub fn union(self, o: Aabb) -> Aabb {
        Aabb {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        (self.lo + self.hi) * 0.5
    }

    /// Entry distance of the ray into the box, when the slab interval
    /// overlaps `(t_min, t_max)`.
    pub fn ray_entry(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            let o = origin.get(axis);
            let inv = inv_dir.get(axis);
            let mut near = (self.lo.get(axis) - o) * inv;
            let mut far = (self.hi.get(axis) - o) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// Squared distance from a point to the box (zero inside).
    pub fn dist2(&self, p: Vec3) -> f64 {
        let mut d2 = 0.0;
        for axis in 0..3 {
            let v = p.get(axis);
            let lo = self.lo.get(axis);
            let hi = self.hi.get(axis);
            let d = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_hit_reports_exact_barycentrics() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(2.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 2.0, 0.0);
        // Aim at the point with barycentrics (0.25, 0.5, 0.25).
        let target = a * 0.25 + b * 0.5 + c * 0.25;
        let origin = target + Vec3::new(0.0, 0.0, 3.0);
        let (t, u, v) =
            ray_triangle(origin, Vec3::new(0.0, 0.0, -1.0), a, b, c, 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(t, 3.0, max_relative = 1e-12);
        assert_relative_eq!(u, 0.5, max_relative = 1e-12);
        assert_relative_eq!(v, 0.25, max_relative = 1e-12);
    }

    #[test]
    fn triangle_misses_outside_and_behind() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        let down = Vec3::new(0.0, 0.0, -1.0);
        let outside = Vec3::new(0.9, 0.9, 1.0);
        assert!(ray_triangle(outside, down, a, b, c, 0.0, f64::INFINITY).is_none());
        let behind = Vec3::new(0.2, 0.2, -1.0);
        assert!(ray_triangle(behind, down, a, b, c, 0.0, f64::INFINITY).is_none());
    }

    #[test]
    fn sphere_roots_are_analytic() {
        let center = Vec3::new(0.0, 0.0, -5.0);
        let origin = Vec3::ZERO;
        let dir = Vec3::new(0.0, 0.0, -1.0);
        let t = ray_sphere(origin, dir, center, 1.0, 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(t, 4.0, max_relative = 1e-12);
        // From inside: the far root.
        let t = ray_sphere(center, dir, center, 1.0, 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(t, 1.0, max_relative = 1e-12);
        // Tangent offset misses.
        assert!(ray_sphere(
            Vec3::new(1.0 + 1e-9, 0.0, 0.0),
            dir,
            center,
            1.0,
            0.0,
            f64::INFINITY
        )
        .is_none());
    }

    #[test]
    fn aabb_entry_and_distance() {
        let b = Aabb {
            lo: Vec3::new(-1.0, -1.0, -1.0),
            hi: Vec3::new(1.0, 1.0, 1.0),
        };
        let origin = Vec3::new(0.0, 0.0, 5.0);
        let dir = Vec3::new(0.0, 0.0, -1.0);
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let entry = b.ray_entry(origin, inv, 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(entry, 4.0, max_relative = 1e-12);
        assert!(b
            .ray_entry(Vec3::new(3.0, 0.0, 5.0), inv, 0.0, f64::INFINITY)
            .is_none());
        assert_relative_eq!(b.dist2(Vec3::new(3.0, 0.0, 0.0)), 4.0, max_relative = 1e-12);
        assert_eq!(b.dist2(Vec3::ZERO), 0.0);
    }
}
