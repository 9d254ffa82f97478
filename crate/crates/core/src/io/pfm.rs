//! PFM (Portable Float Map) I/O for metric depth images.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Writes a grayscale PFM ("Pf"). `data` is row-major with the top row
/// first; the file stores rows bottom-to-top with a little-endian scale
/// line of "-1.0", per the PFM convention.
pub fn write_pfm(data: &[f32], width: u32, height: u32, path: impl AsRef<Path>) -> Result<()> {
    if data.len() != (width as usize) * (height as usize) {
        return Err(Error::InvalidImage(format!(
            "depth buffer length {} does not match {width}x{height}",
            data.len()
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "Pf\n{width} {height}\n-1.0\n")?;
    for row in (0..height as usize).rev() {
        for col in 0..width as usize {
            out.write_all(&data[row * width as usize + col].to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a grayscale PFM back into top-row-first order.
pub fn read_pfm(path: impl AsRef<Path>) -> Result<(Vec<f32>, u32, u32)> {
    let file = path.as_ref().display().to_string();
    let parse_err = |message: &str| Error::Parse {
        file: file.clone(),
        message: message.to_string(),
    };
    let mut reader = BufReader::new(File::open(path.as_ref())?);

    let mut tokens = Vec::new();
    let mut token = Vec::new();
    while tokens.len() < 4 {
        let mut byte = [0u8; 1];
        reader
            .read_exact(&mut byte)
            .map_err(|_| parse_err("truncated header"))?;
        if byte[0].is_ascii_whitespace() {
            if !token.is_empty() {
                tokens.push(String::from_utf8_lossy(&token).into_owned());
                token.clear();
            }
        } else {
            token.push(byte[0]);
        }
    }

    if tokens[0] != "Pf" {
        return Err(parse_err("not a grayscale PFM (expected magic `Pf`)"));
    }
    let width: u32 = tokens[1].parse().map_err(|_| parse_err("bad width"))?;
    let height: u32 = tokens[2].parse().map_err(|_| parse_err("bad height"))?;
    let scale: f32 = tokens[3].parse().map_err(|_| parse_err("bad scale"))?;
    if width == 0 || height == 0 {
        return Err(parse_err("zero-sized image"));
    }
    let little_endian = scale < 0.0;

    let n = (width as usize) * (height as usize);
    let mut payload = vec![0u8; n * 4];
    reader
        .read_exact(&mut payload)
        .map_err(|_| parse_err("truncated payload"))?;

    let mut data = vec![0f32; n];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let bytes = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let value = if little_endian {
            f32::from_le_bytes(bytes)
        } else {
            f32::from_be_bytes(bytes)
        };
        // File stores bottom row first; flip back to top-first.
        let row = height as usize - 1 - i / width as usize;
        data[row * width as usize + i % width as usize] = value;
    }
    Ok((data, width, height))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_depth_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        write_pfm(&[4.0; 6], 3, 2, &path).unwrap();
        let (data, w, h) = read_pfm(&path).unwrap();
        assert_eq!((w, h), (3, 2));
        assert!(data.iter().all(|&v| v == 4.0));
    }

    #[test]
    fn rows_are_stored_bottom_to_top() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        // 1x2 image: top texel 7.0, bottom texel 3.0.
        write_pfm(&[7.0, 3.0], 1, 2, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let payload = &bytes[bytes.len() - 8..];
        assert_eq!(f32::from_le_bytes(payload[0..4].try_into().unwrap()), 3.0);
        assert_eq!(f32::from_le_bytes(payload[4..8].try_into().unwrap()), 7.0);
    }

    #[test]
    fn arbitrary_payload_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        let data: Vec<f32> = (0..12).map(|i| (i as f32).sqrt() * 1.37).collect();
        write_pfm(&data, 4, 3, &path).unwrap();
        let (back, _, _) = read_pfm(&path).unwrap();
        assert_eq!(back, data);
    }
}
