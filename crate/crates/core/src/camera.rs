//! Perspective and orthographic cameras.
//!
//! Pixel (0, 0) is the top-left corner; pixel (i, j) spans
//! [i, i+1) x [j, j+1) so jitter (0.5, 0.5) hits the pixel center. The
//! camera looks along its local -Z with +Y up. Perspective intrinsics are
//! stored as a focal length in pixels; a horizontal field of view measured
//! between the outermost pixel centers can be given instead.

use crate::error::{Error, Result};
use crate::math::{Pose, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraKind {
    Perspective { focal_px: f64 },
    Orthographic { ortho_scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub kind: CameraKind,
    pub width: u32,
    pub height: u32,
    pub pose: Pose,
}

/// A ray with unit direction.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

impl Camera {
    pub fn perspective_focal(focal_px: f64, width: u32, height: u32, pose: Pose) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("resolution must be at least 1x1".into()));
        }
        if !(focal_px > 0.0) || !focal_px.is_finite() {
            return Err(Error::InvalidCamera("focal length must be positive".into()));
        }
        Ok(Camera {
            kind: CameraKind::Perspective { focal_px },
            width,
            height,
            pose,
        })
    }

    /// `fov_x` spans the horizontal angle between the outermost pixel
    /// centers.
    pub fn perspective_fov(fov_x: f64, width: u32, height: u32, pose: Pose) -> Result<Self> {
        if !(fov_x > 0.0 && fov_x < std::f64::consts::PI) {
            return Err(Error::InvalidCamera("fov_x must lie in (0, pi)".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("resolution must be at least 1x1".into()));
        }
        let focal_px = ((width as f64 - 1.0) / 2.0) / (fov_x / 2.0).tan();
        Self::perspective_focal(focal_px.max(f64::MIN_POSITIVE), width, height, pose)
    }

    pub fn orthographic(ortho_scale: f64, width: u32, height: u32, pose: Pose) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("resolution must be at least 1x1".into()));
        }
        if !(ortho_scale > 0.0) || !ortho_scale.is_finite() {
            return Err(Error::InvalidCamera("ortho_scale must be positive".into()));
        }
        Ok(Camera {
            kind: CameraKind::Orthographic { ortho_scale },
            width,
            height,
            pose,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            CameraKind::Perspective { focal_px } if !(focal_px > 0.0) => {
                Err(Error::InvalidCamera("focal length must be positive".into()))
            }
            CameraKind::Orthographic { ortho_scale } if !(ortho_scale > 0.0) => {
                Err(Error::InvalidCamera("ortho_scale must be positive".into()))
            }
            _ if self.width == 0 || self.height == 0 => {
                Err(Error::InvalidCamera("resolution must be at least 1x1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Ray through the sample point (i + ju, j + jv) on the image plane.
    pub fn generate_ray(&self, i: u32, j: u32, ju: f64, jv: f64) -> Result<Ray> {
        if i >= self.width || j >= self.height {
            return Err(Error::PixelOutOfBounds(i, j, self.width, self.height));
        }
        let px = i as f64 + ju;
        let py = j as f64 + jv;
        let cx = self.width as f64 / 2.0;
        let cy = self.height as f64 / 2.0;
        match self.kind {
            CameraKind::Perspective { focal_px } => {
                let x = (px - cx) / focal_px;
                let y = -(py - cy) / focal_px;
                let dir_local = Vec3::new(x, y, -1.0).normalized();
                Ok(Ray {
                    origin: self.pose.position,
                    dir: self.pose.rotation.rotate(dir_local),
                })
            }
            CameraKind::Orthographic { ortho_scale } => {
                let pitch = ortho_scale / self.width as f64;
                let x = (px - cx) * pitch;
                let y = -(py - cy) * pitch;
                let origin_local = Vec3::new(x, y, 0.0);
                Ok(Ray {
                    origin: self.pose.transform_point(origin_local),
                    dir: self.pose.rotation.rotate(Vec3::new(0.0, 0.0, -1.0)),
                })
            }
        }
    }

    /// Continuous pixel coordinates of a world point; `None` when the point
    /// is behind a perspective camera. Points outside the image bounds
    /// still project (callers clip).
    pub fn project(&self, world: Vec3) -> Option<(f64, f64)> {
        let local = self.pose.inverse_transform_point(world);
        let cx = self.width as f64 / 2.0;
        let cy = self.height as f64 / 2.0;
        match self.kind {
            CameraKind::Perspective { focal_px } => {
                if local.z >= 0.0 {
                    return None;
                }
                let u = cx + focal_px * (local.x / -local.z);
                let v = cy - focal_px * (local.y / -local.z);
                Some((u, v))
            }
            CameraKind::Orthographic { ortho_scale } => {
                let pitch = ortho_scale / self.width as f64;
                Some((cx + local.x / pitch, cy - local.y / pitch))
            }
        }
    }
}
