//! Image buffers, PPM/PGM I/O, rotation, luma conversion and clamping.
//!
//! Intensities are kept as `f64` on the continuous `[0, 255]` scale,
//! row-major with channels interleaved.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

pub const MAX_INTENSITY: f64 = 255.0;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed image header: {0}")]
    MalformedHeader(String),
    #[error("unsupported image format: {0}")]
    Unsupported(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("expected {expected} channel(s), got {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::Unsupported(format!("{channels} channels")));
        }
        if data.len() != width * height * channels {
            return Err(ImageError::DimensionMismatch {
                expected: format!("{} values", width * height * channels),
                actual: format!("{} values", data.len()),
            });
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self { width, height, channels, data: vec![value; width * height * channels] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        let i = self.index(x, y, c);
        self.data[i] = v;
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn clamped(mut self) -> Self {
        for v in &mut self.data {
            *v = v.clamp(0.0, MAX_INTENSITY);
        }
        self
    }

    /// Nearest-integer quantization (ties to even) followed by a clamp to `[0, 255]`.
    pub fn quantized(mut self) -> Self {
        for v in &mut self.data {
            *v = quantize(*v) as f64;
        }
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }
}

/// Rounds to the nearest integer with ties to even, saturating into `0..=255`.
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round_ties_even().clamp(0.0, MAX_INTENSITY) as u8
}

/// Reads a binary PPM (`P6`) or PGM (`P5`) file with maxval 255.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let bytes = fs::read(path)?;
    decode_pnm(&bytes)
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Image, ImageError> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let channels = match magic.as_str() {
        "P6" => 3,
        "P5" => 1,
        other => return Err(ImageError::Unsupported(format!("magic {other:?}"))),
    };
    let width = parse_header_number(bytes, &mut pos, "width")?;
    let height = parse_header_number(bytes, &mut pos, "height")?;
    let maxval = parse_header_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(ImageError::Unsupported(format!("maxval {maxval} (only 255 is supported)")));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader("zero dimension".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(ImageError::MalformedHeader("missing raster separator".into()));
    }
    pos += 1;
    let expected = width * height * channels;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(ImageError::MalformedHeader(format!(
            "raster truncated: expected {expected} bytes, found {}",
            raster.len()
        )));
    }
    let data = raster[..expected].iter().map(|&b| b as f64).collect();
    Image::new(width, height, channels, data)
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String, ImageError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(ImageError::MalformedHeader("unexpected end of header".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, ImageError> {
    let tok = next_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| ImageError::MalformedHeader(format!("invalid {what}: {tok:?}")))
}

/// Writes `P6` for 3-channel and `P5` for 1-channel images, quantizing with ties-to-even.
pub fn write_image(image: &Image, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    file.write_all(&encode_pnm(image))?;
    file.flush()?;
    Ok(())
}

pub fn encode_pnm(image: &Image) -> Vec<u8> {
    let magic = if image.channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.to_bytes());
    out
}

/// Rotates about the image center by `angle_deg` (positive turns clockwise on
/// screen, since y points down) using bilinear interpolation. Samples falling outside the source
/// frame read as 0.
pub fn rotate(image: &Image, angle_deg: f64) -> Image {
    if angle_deg == 0.0 {
        return image.clone();
    }
    let (w, h, ch) = image.dims();
    let theta = angle_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mut out = Image::filled(w, h, ch, 0.0);
    let fetch = |x: isize, y: isize, c: usize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            image.get(x as usize, y as usize, c)
        }
    };
    for oy in 0..h {
        for ox in 0..w {
            let dx = ox as f64 - cx;
            let dy = oy as f64 - cy;
            // inverse map: rotate the destination offset by -theta
            let sx = cos * dx + sin * dy + cx;
            let sy = -sin * dx + cos * dy + cy;
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (x0, y0) = (x0 as isize, y0 as isize);
            for c in 0..ch {
                let v = (1.0 - fx) * (1.0 - fy) * fetch(x0, y0, c)
                    + fx * (1.0 - fy) * fetch(x0 + 1, y0, c)
                    + (1.0 - fx) * fy * fetch(x0, y0 + 1, c)
                    + fx * fy * fetch(x0 + 1, y0 + 1, c);
                out.set(ox, oy, c, v);
            }
        }
    }
    out
}

/// `clamp(clean + rho)` pixelwise.
pub fn apply_perturbation(clean: &Image, rho: &[f64]) -> Result<Image, ImageError> {
    if rho.len() != clean.data.len() {
        return Err(ImageError::DimensionMismatch {
            expected: format!("{} deltas", clean.data.len()),
            actual: format!("{} deltas", rho.len()),
        });
    }
    let data = clean
        .data
        .iter()
        .zip(rho)
        .map(|(&p, &d)| (p + d).clamp(0.0, MAX_INTENSITY))
        .collect();
    Ok(Image { data, width: clean.width, height: clean.height, channels: clean.channels })
}

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// BT.601 luma of a 3-channel image.
pub fn rgb_to_luma(image: &Image) -> Result<Image, ImageError> {
    match image.channels {
        3 => {
            let data = image
                .data
                .chunks_exact(3)
                .map(|px| LUMA_R * px[0] + LUMA_G * px[1] + LUMA_B * px[2])
                .collect();
            Image::new(image.width, image.height, 1, data)
        }
        n => Err(ImageError::ChannelMismatch { expected: 3, actual: n }),
    }
}

/// Adds a per-pixel delta plane equally to every channel, then clamps.
pub fn add_luma_delta(image: &Image, delta: &[f64]) -> Result<Image, ImageError> {
    let n = image.width * image.height;
    if delta.len() != n {
        return Err(ImageError::DimensionMismatch {
            expected: format!("{n} plane values"),
            actual: format!("{} plane values", delta.len()),
        });
    }
    let ch = image.channels;
    let mut out = image.clone();
    for (px, &d) in out.data.chunks_exact_mut(ch).zip(delta) {
        for v in px {
            *v = (*v + d).clamp(0.0, MAX_INTENSITY);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize, ch: usize) -> Image {
        let data = (0..w * h * ch).map(|i| ((i * 37) % 256) as f64).collect();
        Image::new(w, h, ch, data).unwrap()
    }

    #[test]
    fn ppm_round_trip_is_bit_exact() {
        let img = ramp(7, 5, 3);
        let back = decode_pnm(&encode_pnm(&img)).unwrap();
        assert_eq!(back, img);
        let gray = ramp(4, 9, 1);
        assert_eq!(decode_pnm(&encode_pnm(&gray)).unwrap(), gray);
    }

    #[test]
    fn rejects_non_255_maxval() {
        let mut bytes = b"P6\n1 1\n65535\n".to_vec();
        bytes.extend([0u8; 6]);
        assert!(matches!(decode_pnm(&bytes), Err(ImageError::Unsupported(_))));
    }

    #[test]
    fn rejects_truncated_raster_and_bad_magic() {
        let bytes = b"P6\n2 2\n255\n\x00\x01".to_vec();
        assert!(matches!(decode_pnm(&bytes), Err(ImageError::MalformedHeader(_))));
        assert!(matches!(decode_pnm(b"P3\n1 1\n255\n0 0 0"), Err(ImageError::Unsupported(_))));
        assert!(matches!(decode_pnm(b"P6\n1"), Err(ImageError::MalformedHeader(_))));
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend([3u8, 250]);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!(img.data(), &[3.0, 250.0]);
    }

    #[test]
    fn writing_rounds_ties_to_even() {
        assert_eq!(quantize(127.5), 128);
        assert_eq!(quantize(126.5), 126);
        assert_eq!(quantize(-3.0), 0);
        assert_eq!(quantize(300.0), 255);
        let img = Image::new(1, 1, 1, vec![127.5]).unwrap();
        assert_eq!(decode_pnm(&encode_pnm(&img)).unwrap().data(), &[128.0]);
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = ramp(6, 4, 3);
        assert_eq!(rotate(&img, 0.0), img);
    }

    #[test]
    fn rotate_180_point_reflects_a_2x2() {
        let img = Image::new(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = rotate(&img, 180.0);
        let expected = [4.0, 3.0, 2.0, 1.0];
        for (a, b) in r.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{:?}", r.data());
        }
    }

    #[test]
    fn four_quarter_turns_compose_to_identity() {
        let img = ramp(9, 9, 3);
        let mut r = img.clone();
        for _ in 0..4 {
            r = rotate(&r, 90.0);
        }
        for (a, b) in r.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rotation_of_a_constant_image_never_adds_mass() {
        let img = Image::filled(16, 12, 3, 200.0);
        for angle in [-60.0, -45.0, -15.0, 15.0, 33.0, 90.0, 135.0, 180.0] {
            assert!(rotate(&img, angle).mean() <= img.mean() + 1e-9);
        }
    }

    #[test]
    fn perturbation_clamps() {
        let clean = Image::new(2, 1, 1, vec![250.0, 10.0]).unwrap();
        assert_eq!(apply_perturbation(&clean, &[200.0, 0.0]).unwrap().data(), &[255.0, 10.0]);
        assert_eq!(apply_perturbation(&clean, &[-300.0, -300.0]).unwrap().data(), &[0.0, 0.0]);
        assert_eq!(apply_perturbation(&clean, &[0.0, 0.0]).unwrap(), clean);
        assert!(apply_perturbation(&clean, &[0.0]).is_err());
    }

    #[test]
    fn luma_matches_bt601() {
        let img = Image::new(2, 1, 3, vec![100.0, 150.0, 200.0, 77.0, 77.0, 77.0]).unwrap();
        let y = rgb_to_luma(&img).unwrap();
        assert!((y.data()[0] - 140.75).abs() < 1e-12);
        assert!((y.data()[1] - 77.0).abs() < 1e-12);
        assert_eq!(add_luma_delta(&img, &[0.0, 0.0]).unwrap(), img);
        assert!(matches!(add_luma_delta(&img, &[0.0]), Err(ImageError::DimensionMismatch { .. })));
        let gray = Image::filled(1, 1, 1, 5.0);
        assert!(matches!(rgb_to_luma(&gray), Err(ImageError::ChannelMismatch { .. })));
    }
}
