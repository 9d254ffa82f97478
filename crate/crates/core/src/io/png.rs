//! PNG reading and writing with sRGB <-> linear conversion.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// sRGB electro-optical transfer: encoded [0,1] to linear.
pub fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Linear [0,1] to sRGB-encoded [0,1].
pub fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

/// Encodes one linear channel to an 8-bit sRGB value, rounding half away
/// from zero.
pub fn encode_srgb8(linear: f64) -> u8 {
    let c = linear_to_srgb(linear.clamp(0.0, 1.0));
    (c * 255.0).round() as u8
}

/// Reads an 8-bit PNG into a linear-light image. Color channels are decoded
/// through the inverse sRGB transfer; alpha stays linear.
pub fn read_png(path: impl AsRef<Path>) -> Result<Image> {
    let decoded = image::open(path.as_ref()).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Parse {
            file: path.as_ref().display().to_string(),
            message: other.to_string(),
        },
    })?;
    let rgba = decoded.to_rgba8();
    let (w, h) = rgba.dimensions();
    let data = rgba
        .pixels()
        .map(|p| {
            [
                srgb_to_linear(p[0] as f64 / 255.0) as f32,
                srgb_to_linear(p[1] as f64 / 255.0) as f32,
                srgb_to_linear(p[2] as f64 / 255.0) as f32,
                (p[3] as f64 / 255.0) as f32,
            ]
        })
        .collect();
    Image::new(w, h, data)
}

/// Writes a linear-light image as an 8-bit sRGB RGBA PNG.
pub fn write_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::with_capacity(img.pixels().len() * 4);
    for p in img.pixels() {
        bytes.push(encode_srgb8(p[0] as f64));
        bytes.push(encode_srgb8(p[1] as f64));
        bytes.push(encode_srgb8(p[2] as f64));
        bytes.push((f64::from(p[3]).clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    write_png_rgba8(&bytes, img.width(), img.height(), path)
}

/// Writes already-encoded 8-bit RGBA rows (top row first).
pub fn write_png_rgba8(rgba: &[u8], width: u32, height: u32, path: impl AsRef<Path>) -> Result<()> {
    if rgba.len() != (width as usize) * (height as usize) * 4 {
        return Err(Error::InvalidImage(format!(
            "RGBA buffer length {} does not match {width}x{height}",
            rgba.len()
        )));
    }
    image::save_buffer(
        path.as_ref(),
        rgba,
        width,
        height,
        image::ColorType::Rgba8,
    )
    .map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::InvalidImage(other.to_string()),
    })
}

/// Writes already-encoded 8-bit RGB rows (top row first).
pub fn write_png_rgb8(rgb: &[u8], width: u32, height: u32, path: impl AsRef<Path>) -> Result<()> {
    if rgb.len() != (width as usize) * (height as usize) * 3 {
        return Err(Error::InvalidImage(format!(
            "RGB buffer length {} does not match {width}x{height}",
            rgb.len()
        )));
    }
    image::save_buffer(path.as_ref(), rgb, width, height, image::ColorType::Rgb8).map_err(|e| {
        match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::InvalidImage(other.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_pixel_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("white.png");
        let img = Image::filled(1, 1, [1.0, 1.0, 1.0, 1.0]).unwrap();
        write_png(&img, &path).unwrap();
        let back = read_png(&path).unwrap();
        assert_eq!(back.texel(0, 0), [1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn encode_decode_is_identity_on_8bit_lattice() {
        for v in 0..=255u8 {
            let lin = srgb_to_linear(v as f64 / 255.0);
            assert_eq!(encode_srgb8(lin), v);
        }
    }

    #[test]
    fn linear_half_encodes_to_188() {
        assert_eq!(encode_srgb8(0.5), 188);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            read_png("/nonexistent/missing.png"),
            Err(Error::Io(_))
        ));
    }
}
