//! Vectors, rotation representations and conversions, poses.
//!
//! Conventions used throughout the crate:
//! - right-handed world coordinates, Z up;
//! - Euler angles are extrinsic XYZ (apply X, then Y, then Z about world axes);
//! - cameras look along their local -Z with +Y up;
//! - unit quaternions are canonicalized to `w >= 0` so that serialization
//!   round-trips are bit-stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 3-component double precision vector. Positions are in meters,
/// directions are unitless.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Unit vector in the same direction. The caller must ensure the vector
    /// is not (near) zero; use [`Vec3::try_normalized`] otherwise.
    #[inline]
    pub fn normalized(self) -> Vec3 {
        self / self.length()
    }

    #[inline]
    pub fn try_normalized(self) -> Option<Vec3> {
        let len = self.length();
        if len > 1e-12 {
            Some(self / len)
        } else {
            None
        }
    }

    #[inline]
    pub fn min_component(self) -> f64 {
        self.x.min(self.y).min(self.z)
    }

    #[inline]
    pub fn max_component(self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).length()
    }

    /// Component index access (0 = x, 1 = y, 2 = z).
    #[inline]
    pub fn get(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl std::ops::Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl std::ops::AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_rows(r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]) -> Self {
        Mat3 { m: [r0, r1, r2] }
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3 {
            m: [
                [c0.x, c1.x, c2.x],
                [c0.y, c1.y, c2.y],
                [c0.z, c1.z, c2.z],
            ],
        }
    }

    pub fn col(&self, i: usize) -> Vec3 {
        Vec3::new(self.m[0][i], self.m[1][i], self.m[2][i])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::new(self.m[i][0], self.m[i][1], self.m[i][2])
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3::from_cols(self.row(0), self.row(1), self.row(2))
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        Mat3::from_cols(
            self.mul_vec(o.col(0)),
            self.mul_vec(o.col(1)),
            self.mul_vec(o.col(2)),
        )
    }

    pub fn determinant(&self) -> f64 {
        self.col(0).dot(self.col(1).cross(self.col(2)))
    }
}

/// A rotation stored as a unit quaternion `(w, x, y, z)` with `w >= 0`.
///
/// `(w, x, y, z)` and `(-w, -x, -y, -z)` denote the same rotation; the
/// canonical sign makes equality and serialization stable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct UnitQuat {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for UnitQuat {
    fn default() -> Self {
        UnitQuat::IDENTITY
    }
}

impl UnitQuat {
    pub const IDENTITY: UnitQuat = UnitQuat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion from raw components, normalizing and
    /// canonicalizing the sign. Fails on a (near) zero quaternion.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-9 {
            return Err(Error::InvalidRotation(format!(
                "quaternion ({w}, {x}, {y}, {z}) has invalid norm {norm}"
            )));
        }
        Ok(UnitQuat {
            w: w / norm,
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
        .canonicalized())
    }

    fn canonicalized(self) -> Self {
        if self.w < 0.0 {
            UnitQuat {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            self
        }
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }

    #[inline]
    pub fn vector(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn components(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self> {
        let axis = axis.try_normalized().ok_or_else(|| {
            Error::InvalidRotation("axis-angle rotation with zero axis".into())
        })?;
        let (s, c) = (angle * 0.5).sin_cos();
        Ok(UnitQuat {
            w: c,
            x: axis.x * s,
            y: axis.y * s,
            z: axis.z * s,
        }
        .canonicalized())
    }

    /// Converts an orthonormal rotation matrix (det +1). Fails when the
    /// matrix deviates from orthonormality by more than 1e-4 (Frobenius).
    pub fn from_matrix(m: &Mat3) -> Result<Self> {
        let mtm = m.transpose().mul_mat(m);
        let mut dev = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let id = if r == c { 1.0 } else { 0.0 };
                let d = mtm.m[r][c] - id;
                dev += d * d;
            }
        }
        if dev.sqrt() > 1e-4 {
            return Err(Error::InvalidRotation(format!(
                "matrix is not orthonormal (Frobenius deviation {:.3e})",
                dev.sqrt()
            )));
        }
        if m.determinant() < 0.0 {
            return Err(Error::InvalidRotation(
                "matrix has negative determinant (reflection)".into(),
            ));
        }
        // Shepperd's method: pick the numerically largest pivot.
        let t = m.m[0][0] + m.m[1][1] + m.m[2][2];
        let q = if t > 0.0 {
            let s = (t + 1.0).sqrt() * 2.0;
            (
                0.25 * s,
                (m.m[2][1] - m.m[1][2]) / s,
                (m.m[0][2] - m.m[2][0]) / s,
                (m.m[1][0] - m.m[0][1]) / s,
            )
        } else if m.m[0][0] > m.m[1][1] && m.m[0][0] > m.m[2][2] {
            let s = (1.0 + m.m[0][0] - m.m[1][1] - m.m[2][2]).sqrt() * 2.0;
            (
                (m.m[2][1] - m.m[1][2]) / s,
                0.25 * s,
                (m.m[0][1] + m.m[1][0]) / s,
                (m.m[0][2] + m.m[2][0]) / s,
            )
        } else if m.m[1][1] > m.m[2][2] {
            let s = (1.0 + m.m[1][1] - m.m[0][0] - m.m[2][2]).sqrt() * 2.0;
            (
                (m.m[0][2] - m.m[2][0]) / s,
                (m.m[0][1] + m.m[1][0]) / s,
                0.25 * s,
                (m.m[1][2] + m.m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m.m[2][2] - m.m[0][0] - m.m[1][1]).sqrt() * 2.0;
            (
                (m.m[1][0] - m.m[0][1]) / s,
                (m.m[0][2] + m.m[2][0]) / s,
                (m.m[1][2] + m.m[2][1]) / s,
                0.25 * s,
            )
        };
        UnitQuat::new(q.0, q.1, q.2, q.3)
    }

    /// Extrinsic XYZ Euler angles: rotate about world X, then Y, then Z.
    pub fn from_euler_xyz(rx: f64, ry: f64, rz: f64) -> Self {
        let qx = UnitQuat::from_axis_angle(Vec3::X, rx).expect("unit axis");
        let qy = UnitQuat::from_axis_angle(Vec3::Y, ry).expect("unit axis");
        let qz = UnitQuat::from_axis_angle(Vec3::Z, rz).expect("unit axis");
        qz.mul(&qy).mul(&qx)
    }

    /// Hamilton product; `self` is applied after `other` when rotating.
    pub fn mul(&self, o: &UnitQuat) -> UnitQuat {
        UnitQuat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
        .canonicalized()
    }

    pub fn inverse(&self) -> UnitQuat {
        UnitQuat {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
        .canonicalized()
    }

    /// Rotates a vector.
    #[inline]
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let qv = self.vector();
        let t = qv.cross(v) * 2.0;
        v + t * self.w + qv.cross(t)
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::from_cols(
            self.rotate(Vec3::X),
            self.rotate(Vec3::Y),
            self.rotate(Vec3::Z),
        )
    }

    #[inline]
    pub fn dot(&self, o: &UnitQuat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Angular distance between the two rotations, in `[0, pi]`.
    pub fn angle_to(&self, o: &UnitQuat) -> f64 {
        2.0 * self.dot(o).abs().clamp(0.0, 1.0).acos()
    }

    /// Angle of this rotation about its own axis, in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        self.angle_to(&UnitQuat::IDENTITY)
    }
}

impl From<UnitQuat> for [f64; 4] {
    fn from(q: UnitQuat) -> Self {
        q.components()
    }
}

impl TryFrom<[f64; 4]> for UnitQuat {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        UnitQuat::new(a[0], a[1], a[2], a[3])
    }
}

/// One of the four supported ways to specify a rotation.
#[derive(Debug, Clone, PartialEq)]
pub enum RotationSpec {
    Quaternion(UnitQuat),
    AxisAngle { axis: Vec3, angle: f64 },
    Matrix(Mat3),
    EulerXyz { rx: f64, ry: f64, rz: f64 },
}

/// Converts any rotation representation to the canonical quaternion form.
pub fn to_quaternion(spec: &RotationSpec) -> Result<UnitQuat> {
    match spec {
        RotationSpec::Quaternion(q) => Ok(*q),
        RotationSpec::AxisAngle { axis, angle } => UnitQuat::from_axis_angle(*axis, *angle),
        RotationSpec::Matrix(m) => UnitQuat::from_matrix(m),
        RotationSpec::EulerXyz { rx, ry, rz } => Ok(UnitQuat::from_euler_xyz(*rx, *ry, *rz)),
    }
}

/// Rotation that makes a camera at `eye` view `target` along its local -Z.
///
/// The up hint defaults to world Z; when the view direction is (nearly)
/// collinear with world Z the hint falls back to world Y. The returned
/// rotation maps camera-local X to the right vector, local Y to up and
/// local Z to the negated forward direction.
pub fn look_at_rotation(eye: Vec3, target: Vec3, up_hint: Option<Vec3>) -> Result<UnitQuat> {
    let delta = target - eye;
    if delta.length() <= 1e-9 {
        return Err(Error::DegenerateLookAt);
    }
    let forward = delta.normalized();
    let hint = up_hint.unwrap_or(if forward.z.abs() > 1.0 - 1e-6 {
        Vec3::Y
    } else {
        Vec3::Z
    });
    let right = forward
        .cross(hint)
        .try_normalized()
        .ok_or(Error::DegenerateLookAt)?;
    let up = right.cross(forward);
    UnitQuat::from_matrix(&Mat3::from_cols(right, up, -forward))
}

/// Shortest-arc spherical linear interpolation between two rotations.
///
/// `t = 0` returns `a` exactly and `t = 1` returns `b` exactly; in between
/// the angular velocity is constant. Near-identical rotations fall back to
/// normalized linear interpolation.
pub fn slerp(a: &UnitQuat, b: &UnitQuat, t: f64) -> UnitQuat {
    if t == 0.0 {
        return *a;
    }
    if t == 1.0 {
        return *b;
    }
    let mut dot = a.dot(b);
    let mut sign = 1.0;
    if dot < 0.0 {
        dot = -dot;
        sign = -1.0;
    }
    let (s0, s1) = if dot > 1.0 - 1e-9 {
        (1.0 - t, t)
    } else {
        let theta = dot.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        (
            ((1.0 - t) * theta).sin() / sin_theta,
            (t * theta).sin() / sin_theta,
        )
    };
    let s1 = s1 * sign;
    UnitQuat::new(
        a.w * s0 + b.w * s1,
        a.x * s0 + b.x * s1,
        a.y * s0 + b.y * s1,
        a.z * s0 + b.z * s1,
    )
    .expect("slerp of unit quaternions is nonzero")
}

/// A rigid placement in the world: position plus rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub rotation: UnitQuat,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vec3::ZERO,
        rotation: UnitQuat::IDENTITY,
    };

    pub fn new(position: Vec3, rotation: UnitQuat) -> Self {
        Pose { position, rotation }
    }

    pub fn from_position(position: Vec3) -> Self {
        Pose {
            position,
            rotation: UnitQuat::IDENTITY,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.position
    }

    #[inline]
    pub fn transform_dir(&self, d: Vec3) -> Vec3 {
        self.rotation.rotate(d)
    }

    /// Maps a world point into the local frame.
    #[inline]
    pub fn inverse_transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.inverse().rotate(p - self.position)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_quat(rng: &mut impl Rng) -> UnitQuat {
        loop {
            let q = UnitQuat::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if let Ok(q) = q {
                return q;
            }
        }
    }

    #[test]
    fn identity_matrix_converts_to_identity_quaternion() {
        let q = to_quaternion(&RotationSpec::Matrix(Mat3::IDENTITY)).unwrap();
        assert_eq!(q.components(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn axis_angle_half_turn_about_z() {
        let q = to_quaternion(&RotationSpec::AxisAngle {
            axis: Vec3::Z,
            angle: std::f64::consts::FRAC_PI_2,
        })
        .unwrap();
        let c = q.components();
        assert_abs_diff_eq!(c[0], 0.70711, epsilon = 1e-5);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[3], 0.70711, epsilon = 1e-5);
    }

    #[test]
    fn euler_single_axis_matches_axis_angle() {
        let q = to_quaternion(&RotationSpec::EulerXyz {
            rx: std::f64::consts::FRAC_PI_2,
            ry: 0.0,
            rz: 0.0,
        })
        .unwrap();
        let c = q.components();
        assert_abs_diff_eq!(c[0], 0.70711, epsilon = 1e-5);
        assert_abs_diff_eq!(c[1], 0.70711, epsilon = 1e-5);
    }

    #[test]
    fn euler_is_extrinsic_xyz() {
        // Extrinsic XYZ: world X rotated by rx=90 about X stays put, then
        // rz=90 about world Z sends X to Y. Compare against matrix product.
        let (rx, ry, rz) = (0.3, -0.7, 1.1);
        let q = UnitQuat::from_euler_xyz(rx, ry, rz);
        let mx = UnitQuat::from_axis_angle(Vec3::X, rx).unwrap().to_matrix();
        let my = UnitQuat::from_axis_angle(Vec3::Y, ry).unwrap().to_matrix();
        let mz = UnitQuat::from_axis_angle(Vec3::Z, rz).unwrap().to_matrix();
        let m = mz.mul_mat(&my.mul_mat(&mx));
        for v in [Vec3::X, Vec3::Y, Vec3::Z] {
            let a = q.rotate(v);
            let b = m.mul_vec(v);
            assert_abs_diff_eq!((a - b).length(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_orthonormal_matrix_is_rejected() {
        let m = Mat3::from_rows([1.0, 0.0, 0.0], [0.0, 1.001, 0.0], [0.0, 0.0, 1.0]);
        assert!(matches!(
            UnitQuat::from_matrix(&m),
            Err(Error::InvalidRotation(_))
        ));
    }

    #[test]
    fn reflection_matrix_is_rejected() {
        let m = Mat3::from_rows([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]);
        assert!(matches!(
            UnitQuat::from_matrix(&m),
            Err(Error::InvalidRotation(_))
        ));
    }

    #[test]
    fn zero_axis_is_rejected() {
        assert!(matches!(
            UnitQuat::from_axis_angle(Vec3::ZERO, 1.0),
            Err(Error::InvalidRotation(_))
        ));
    }

    #[test]
    fn all_forms_round_trip_basis_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let q = random_quat(&mut rng);
            let specs = [
                RotationSpec::Quaternion(q),
                RotationSpec::Matrix(q.to_matrix()),
                {
                    let angle = q.angle();
                    let axis = if angle > 1e-9 {
                        q.vector().normalized()
                    } else {
                        Vec3::Z
                    };
                    RotationSpec::AxisAngle { axis, angle }
                },
            ];
            for spec in &specs {
                let q2 = to_quaternion(spec).unwrap();
                for v in [Vec3::X, Vec3::Y, Vec3::Z] {
                    assert!((q.rotate(v) - q2.rotate(v)).length() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn look_at_from_positive_x() {
        let q = look_at_rotation(Vec3::new(5.0, 0.0, 0.0), Vec3::ZERO, None).unwrap();
        assert!((q.rotate(Vec3::X) - Vec3::Y).length() < 1e-9); // right
        assert!((q.rotate(Vec3::Y) - Vec3::Z).length() < 1e-9); // up
        assert!((q.rotate(-Vec3::Z) - -Vec3::X).length() < 1e-9); // forward
    }

    #[test]
    fn look_at_straight_down_takes_y_hint_branch() {
        let q = look_at_rotation(Vec3::new(0.0, 0.0, 5.0), Vec3::ZERO, None).unwrap();
        assert!((q.rotate(-Vec3::Z) - -Vec3::Z).length() < 1e-9); // forward -Z
        assert!((q.rotate(Vec3::X) - Vec3::X).length() < 1e-9); // right = f x Y
    }

    #[test]
    fn look_at_coincident_eye_target_errors() {
        assert!(matches!(
            look_at_rotation(Vec3::X, Vec3::X, None),
            Err(Error::DegenerateLookAt)
        ));
    }

    #[test]
    fn look_at_frames_are_orthonormal_right_handed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let eye = Vec3::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            let target = Vec3::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            if (target - eye).length() <= 1e-6 {
                continue;
            }
            let q = look_at_rotation(eye, target, None).unwrap();
            let m = q.to_matrix();
            let mtm = m.transpose().mul_mat(&m);
            for r in 0..3 {
                for c in 0..3 {
                    let id = if r == c { 1.0 } else { 0.0 };
                    assert!((mtm.m[r][c] - id).abs() < 1e-6);
                }
            }
            assert!((m.determinant() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn slerp_endpoints_are_exact() {
        let a = UnitQuat::from_axis_angle(Vec3::X, 0.4).unwrap();
        let b = UnitQuat::from_axis_angle(Vec3::Y, 1.3).unwrap();
        assert_eq!(slerp(&a, &b, 0.0), a);
        assert_eq!(slerp(&a, &b, 1.0), b);
    }

    #[test]
    fn slerp_midpoint_of_half_turn() {
        let a = UnitQuat::IDENTITY;
        let b = UnitQuat::from_axis_angle(Vec3::Z, std::f64::consts::PI).unwrap();
        let mid = slerp(&a, &b, 0.5);
        let expected = UnitQuat::from_axis_angle(Vec3::Z, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(mid.angle_to(&expected) < 1e-9);
    }

    #[test]
    fn slerp_angle_is_linear_in_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let t: f64 = rng.random_range(0.0..1.0);
            let total = a.angle_to(&b);
            let got = slerp(&a, &b, t).angle_to(&a);
            assert!(
                (got - t * total).abs() < 1e-6,
                "angle {got} vs {} at t={t}",
                t * total
            );
        }
    }

    #[test]
    fn quaternions_canonicalize_to_nonnegative_w() {
        let q = UnitQuat::new(-0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(q.w() >= 0.0);
        assert_eq!(q.components(), [0.5, -0.5, -0.5, -0.5]);
    }
}
