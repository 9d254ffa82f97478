//! In-memory linear-light image buffer with bilinear sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RGBA image stored as linear-light f32, row 0 at the top.
///
/// UV sampling follows the texture convention: `v = 0` addresses the bottom
/// row, coordinates outside `[0, 1]` wrap (repeat), and filtering is
/// bilinear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<[f32; 4]>,
}

impl Image {
    pub fn new(width: u32, height: u32, data: Vec<[f32; 4]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-sized image {width}x{height}"
            )));
        }
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidImage(format!(
                "pixel buffer length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, rgba: [f32; 4]) -> Result<Self> {
        Image::new(
            width,
            height,
            vec![rgba; (width as usize) * (height as usize)],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; 4]] {
        &self.data
    }

    /// Texel access with `y` counted from the top row (storage order).
    #[inline]
    pub fn texel(&self, x: u32, y: u32) -> [f32; 4] {
        self.data[(y as usize) * (self.width as usize) + (x as usize)]
    }

    /// Texel access with `ty` counted from the bottom row (UV orientation).
    #[inline]
    pub fn texel_uv(&self, x: u32, ty: u32) -> [f32; 4] {
        self.texel(x, self.height - 1 - ty)
    }

    #[inline]
    pub fn set_texel_uv(&mut self, x: u32, ty: u32, rgba: [f32; 4]) {
        let y = self.height - 1 - ty;
        self.data[(y as usize) * (self.width as usize) + (x as usize)] = rgba;
    }

    /// Bilinear sample with repeat wrapping; `v = 0` is the image bottom.
    pub fn sample(&self, u: f64, v: f64) -> [f32; 4] {
        let w = self.width as f64;
        let h = self.height as f64;
        // Continuous texel coordinates; texel centers sit at integers.
        let x = u * w - 0.5;
        let y = v * h - 0.5;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = (x - x0) as f32;
        let fy = (y - y0) as f32;
        let xi = |i: f64| -> u32 { (i.rem_euclid(w)) as u32 % self.width };
        let yi = |i: f64| -> u32 { (i.rem_euclid(h)) as u32 % self.height };
        let (x0i, x1i) = (xi(x0), xi(x0 + 1.0));
        let (y0i, y1i) = (yi(y0), yi(y0 + 1.0));
        let t00 = self.texel_uv(x0i, y0i);
        let t10 = self.texel_uv(x1i, y0i);
        let t01 = self.texel_uv(x0i, y1i);
        let t11 = self.texel_uv(x1i, y1i);
        let mut out = [0.0f32; 4];
        for c in 0..4 {
            let a = t00[c] * (1.0 - fx) + t10[c] * fx;
            let b = t01[c] * (1.0 - fx) + t11[c] * fx;
            out[c] = a * (1.0 - fy) + b * fy;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_image_returns_single_texel_everywhere() {
        let img = Image::filled(1, 1, [0.25, 0.5, 0.75, 1.0]).unwrap();
        for (u, v) in [(0.0, 0.0), (0.5, 0.5), (0.99, 0.01), (-3.7, 12.2)] {
            assert_eq!(img.sample(u, v), [0.25, 0.5, 0.75, 1.0]);
        }
    }

    #[test]
    fn sampling_wraps_with_period_one() {
        let img = Image::new(
            2,
            1,
            vec![[0.0, 0.0, 0.0, 1.0], [1.0, 1.0, 1.0, 1.0]],
        )
        .unwrap();
        let base = img.sample(0.5, 0.5);
        for k in [-2.0, -1.0, 1.0, 3.0] {
            assert_eq!(img.sample(0.5 + k, 0.5), base);
        }
    }

    #[test]
    fn texel_centers_reproduce_exact_values() {
        // 4x2 gradient; centers are at ((x+0.5)/W, (y+0.5)/H).
        let w = 4u32;
        let h = 2u32;
        let mut data = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let val = (y * w + x) as f32 / 8.0;
                data.push([val, 1.0 - val, val * 0.5, 1.0]);
            }
        }
        let img = Image::new(w, h, data).unwrap();
        for ty in 0..h {
            for x in 0..w {
                let u = (x as f64 + 0.5) / w as f64;
                let v = (ty as f64 + 0.5) / h as f64;
                assert_eq!(img.sample(u, v), img.texel_uv(x, ty));
            }
        }
    }

    #[test]
    fn zero_sized_image_is_rejected() {
        assert!(Image::new(0, 4, vec![]).is_err());
    }
}
