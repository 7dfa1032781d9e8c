//! Genotype layouts and their decoding into perturbation patterns.
//!
//! Two layouts are supported:
//!
//! * [`DirectLayout`]: one intensity delta per `N_w × N_w` pixel block and
//!   encoded channel. Every pixel of a block receives the block's value.
//! * [`DctLayout`]: `N_AP` alteration patterns of `N_DCT × N_DCT` DCT
//!   coefficients, plus one real-valued selector per `N_DCT × N_DCT` block.
//!   The selector is floored at decode; `0` leaves the block untouched and
//!   `r ≥ 1` adds pattern `r` to the block's luminance coefficients.
//!
//! Genotypes are flat `f64` slices; a layout describes how to read them.

mod dct;

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dct::BlockDct;

use crate::imaging::{self, Image, ImageError};

pub const DEFAULT_DCT_BLOCK: usize = 8;
pub const DEFAULT_COEFFICIENT_BOUND: f64 = 30.0;

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("genotype has {actual} variables, layout expects {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("image {actual:?} does not match layout dims {expected:?}")]
    ImageMismatch { expected: (usize, usize, usize), actual: (usize, usize, usize) },
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Per-coordinate box bounds of a genotype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn uniform(len: usize, lower: f64, upper: f64) -> Self {
        Self { lower: vec![lower; len], upper: vec![upper; len] }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn clamp(&self, k: usize, v: f64) -> f64 {
        v.clamp(self.lower[k], self.upper[k])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x.iter().enumerate().all(|(k, &v)| v >= self.lower[k] && v <= self.upper[k])
    }
}

/// Signed per-pixel, per-channel intensity deltas on the 0–255 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPattern {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl PerturbationPattern {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height * channels);
        Self { width, height, channels, data }
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

    pub fn apply_to(&self, clean: &Image) -> Result<Image, ImageError> {
        imaging::apply_perturbation(clean, &self.data)
    }

    /// Grayscale rendering: mid-gray is no change, brighter is a positive
    /// delta, darker a negative one. Channels are averaged and the result is
    /// scaled symmetrically by the largest absolute delta.
    pub fn visualize(&self) -> Image {
        let plane: Vec<f64> = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px.iter().sum::<f64>() / self.channels as f64)
            .collect();
        let peak = plane.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let data = plane
            .iter()
            .map(|&d| if peak > 0.0 { 127.5 + 127.5 * d / peak } else { 127.5 })
            .collect();
        Image::new(self.width, self.height, 1, data).expect("plane matches dims")
    }

    /// Raw deltas, one row per pixel: `x,y,c0[,c1,c2]`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y");
        for c in 0..self.channels {
            let _ = write!(out, ",c{c}");
        }
        out.push('\n');
        for y in 0..self.height {
            for x in 0..self.width {
                let _ = write!(out, "{x},{y}");
                let base = (y * self.width + x) * self.channels;
                for c in 0..self.channels {
                    let _ = write!(out, ",{}", self.data[base + c]);
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Which image channels the direct layout perturbs.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectChannels {
    /// One variable per block per image channel.
    All,
    /// One variable per block, added equally to every channel.
    Luma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectLayout {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub block_size: usize,
    pub mode: DirectChannels,
    pub lower: f64,
    pub upper: f64,
}

impl DirectLayout {
    pub fn new(width: usize, height: usize, channels: usize, block_size: usize, bound: f64) -> Self {
        Self { width, height, channels, block_size, mode: DirectChannels::All, lower: -bound, upper: bound }
    }

    pub fn luma(mut self) -> Self {
        self.mode = DirectChannels::Luma;
        self
    }

    pub fn blocks_x(&self) -> usize {
        self.width.div_ceil(self.block_size)
    }

    pub fn blocks_y(&self) -> usize {
        self.height.div_ceil(self.block_size)
    }

    pub fn encoded_channels(&self) -> usize {
        match self.mode {
            DirectChannels::All => self.channels,
            DirectChannels::Luma => 1,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks_x() * self.blocks_y() * self.encoded_channels()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Genotype index of block `(bx, by)` (column, row) and encoded channel `c`.
    pub fn index(&self, bx: usize, by: usize, c: usize) -> usize {
        (by * self.blocks_x() + bx) * self.encoded_channels() + c
    }

    fn validate(&self) -> Result<(), EncodingError> {
        if self.width == 0 || self.height == 0 {
            return Err(EncodingError::InvalidLayout("image dims must be positive".into()));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(EncodingError::InvalidLayout(format!("{} channels", self.channels)));
        }
        if self.block_size == 0 {
            return Err(EncodingError::InvalidLayout("block size must be ≥ 1".into()));
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower <= 0.0 && self.upper >= 0.0) {
            return Err(EncodingError::InvalidLayout("bounds must be finite and contain 0".into()));
        }
        Ok(())
    }

    pub fn decode(&self, genotype: &[f64]) -> Result<PerturbationPattern, EncodingError> {
        check_len(self.len(), genotype)?;
        let (w, h, ch) = (self.width, self.height, self.channels);
        let gch = self.encoded_channels();
        let mut data = vec![0.0; w * h * ch];
        for y in 0..h {
            let by = y / self.block_size;
            for x in 0..w {
                let bx = x / self.block_size;
                let base = (y * w + x) * ch;
                for c in 0..ch {
                    let gc = if gch == 1 { 0 } else { c };
                    data[base + c] = genotype[self.index(bx, by, gc)];
                }
            }
        }
        Ok(PerturbationPattern { width: w, height: h, channels: ch, data })
    }
}

/// `N_DCT² · N_AP + ⌈W / N_DCT⌉ · ⌈H / N_DCT⌉`.
pub fn dct_dims(width: usize, height: usize, n_patterns: usize, n_dct: usize) -> usize {
    n_dct * n_dct * n_patterns + width.div_ceil(n_dct) * height.div_ceil(n_dct)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DctLayout {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub n_patterns: usize,
    pub n_dct: usize,
    pub coefficient_bound: f64,
}

impl DctLayout {
    pub fn new(width: usize, height: usize, channels: usize, n_patterns: usize) -> Self {
        Self {
            width,
            height,
            channels,
            n_patterns,
            n_dct: DEFAULT_DCT_BLOCK,
            coefficient_bound: DEFAULT_COEFFICIENT_BOUND,
        }
    }

    pub fn blocks_x(&self) -> usize {
        self.width.div_ceil(self.n_dct)
    }

    pub fn blocks_y(&self) -> usize {
        self.height.div_ceil(self.n_dct)
    }

    pub fn n_selectors(&self) -> usize {
        self.blocks_x() * self.blocks_y()
    }

    pub fn pattern_len(&self) -> usize {
        self.n_dct * self.n_dct
    }

    pub fn len(&self) -> usize {
        dct_dims(self.width, self.height, self.n_patterns, self.n_dct)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Selector section: one value per block, row-major over blocks.
    pub fn selectors<'a>(&self, genotype: &'a [f64]) -> &'a [f64] {
        &genotype[..self.n_selectors()]
    }

    /// Coefficient pattern `r` in `1..=N_AP`, row-major `N_DCT × N_DCT`.
    pub fn pattern<'a>(&self, genotype: &'a [f64], r: usize) -> &'a [f64] {
        assert!(r >= 1 && r <= self.n_patterns);
        let start = self.n_selectors() + (r - 1) * self.pattern_len();
        &genotype[start..start + self.pattern_len()]
    }

    /// Floors a selector value into `0..=N_AP`.
    pub fn pattern_index(&self, selector: f64) -> usize {
        if selector.is_nan() || selector < 1.0 {
            0
        } else {
            (selector.floor() as usize).min(self.n_patterns)
        }
    }

    fn validate(&self) -> Result<(), EncodingError> {
        if self.width == 0 || self.height == 0 {
            return Err(EncodingError::InvalidLayout("image dims must be positive".into()));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(EncodingError::InvalidLayout(format!("{} channels", self.channels)));
        }
        if self.n_patterns == 0 {
            return Err(EncodingError::InvalidLayout("N_AP must be ≥ 1".into()));
        }
        if self.n_dct < 2 {
            return Err(EncodingError::InvalidLayout("N_DCT must be ≥ 2".into()));
        }
        if !(self.coefficient_bound.is_finite() && self.coefficient_bound >= 0.0) {
            return Err(EncodingError::InvalidLayout("coefficient bound must be finite and ≥ 0".into()));
        }
        Ok(())
    }

    /// Round-trips every block of the clean image's luminance through the DCT,
    /// adds the selected pattern where the selector is ≥ 1, and returns the
    /// quantized reconstruction minus the clean image.
    pub fn decode(&self, genotype: &[f64], clean: &Image) -> Result<PerturbationPattern, EncodingError> {
        check_len(self.len(), genotype)?;
        let expected = (self.width, self.height, self.channels);
        if clean.dims() != expected {
            return Err(EncodingError::ImageMismatch { expected, actual: clean.dims() });
        }
        let plane = match self.channels {
            3 => imaging::rgb_to_luma(clean)?.into_data(),
            _ => clean.data().to_vec(),
        };
        let (w, h, n) = (self.width, self.height, self.n_dct);
        let codec = BlockDct::new(n);
        let selectors = self.selectors(genotype);
        let mut rebuilt = vec![0.0; w * h];
        let mut block = vec![0.0; n * n];
        for by in 0..self.blocks_y() {
            for bx in 0..self.blocks_x() {
                // edge-replicate trailing partial blocks
                for row in 0..n {
                    let y = (by * n + row).min(h - 1);
                    for col in 0..n {
                        let x = (bx * n + col).min(w - 1);
                        block[row * n + col] = plane[y * w + x];
                    }
                }
                let mut coeffs = codec.forward(&block);
                let r = self.pattern_index(selectors[by * self.blocks_x() + bx]);
                if r >= 1 {
                    for (c, d) in coeffs.iter_mut().zip(self.pattern(genotype, r)) {
                        *c += d;
                    }
                }
                let pixels = codec.inverse(&coeffs);
                for row in 0..n {
                    let y = by * n + row;
                    if y >= h {
                        break;
                    }
                    for col in 0..n {
                        let x = bx * n + col;
                        if x >= w {
                            break;
                        }
                        rebuilt[y * w + x] = pixels[row * n + col];
                    }
                }
            }
        }
        let delta: Vec<f64> = rebuilt.iter().zip(&plane).map(|(r, p)| r - p).collect();
        let perturbed = match self.channels {
            3 => imaging::add_luma_delta(clean, &delta)?,
            _ => Image::new(w, h, 1, rebuilt)?.clamped(),
        }
        .quantized();
        let data = perturbed.data().iter().zip(clean.data()).map(|(p, c)| p - c).collect();
        Ok(PerturbationPattern { width: w, height: h, channels: self.channels, data })
    }
}

/// A genotype layout together with its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    Direct(DirectLayout),
    Dct(DctLayout),
}

impl Layout {
    pub fn validate(&self) -> Result<(), EncodingError> {
        match self {
            Layout::Direct(l) => l.validate(),
            Layout::Dct(l) => l.validate(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Layout::Direct(l) => l.len(),
            Layout::Dct(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn image_dims(&self) -> (usize, usize, usize) {
        match self {
            Layout::Direct(l) => (l.width, l.height, l.channels),
            Layout::Dct(l) => (l.width, l.height, l.channels),
        }
    }

    pub fn bounds(&self) -> Bounds {
        match self {
            Layout::Direct(l) => Bounds::uniform(l.len(), l.lower, l.upper),
            Layout::Dct(l) => {
                let mut b = Bounds::uniform(l.n_selectors(), 0.0, (l.n_patterns + 1) as f64);
                let coeffs = l.n_patterns * l.pattern_len();
                b.lower.extend(std::iter::repeat(-l.coefficient_bound).take(coeffs));
                b.upper.extend(std::iter::repeat(l.coefficient_bound).take(coeffs));
                b
            }
        }
    }

    pub fn decode(&self, genotype: &[f64], clean: &Image) -> Result<PerturbationPattern, EncodingError> {
        match self {
            Layout::Direct(l) => {
                let expected = (l.width, l.height, l.channels);
                if clean.dims() != expected {
                    return Err(EncodingError::ImageMismatch { expected, actual: clean.dims() });
                }
                l.decode(genotype)
            }
            Layout::Dct(l) => l.decode(genotype, clean),
        }
    }
}

fn check_len(expected: usize, genotype: &[f64]) -> Result<(), EncodingError> {
    if genotype.len() != expected {
        return Err(EncodingError::LengthMismatch { expected, actual: genotype.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn textured(w: usize, h: usize, ch: usize) -> Image {
        let data = (0..w * h * ch).map(|i| ((i * 53 + (i / 7) * 11) % 200 + 20) as f64).collect();
        Image::new(w, h, ch, data).unwrap()
    }

    #[test]
    fn direct_genotype_lengths() {
        assert_eq!(DirectLayout::new(32, 32, 3, 1, 200.0).len(), 3072);
        assert_eq!(DirectLayout::new(224, 224, 3, 3, 200.0).luma().len(), 5625);
        assert_eq!(DirectLayout::new(224, 224, 1, 3, 200.0).len(), 5625);
        assert_eq!(DirectLayout::new(10, 7, 3, 4, 1.0).len(), 3 * 2 * 3);
    }

    #[test]
    fn dct_dimension_counts() {
        assert_eq!(dct_dims(224, 224, 1, 8), 848);
        assert_eq!(dct_dims(224, 224, 5, 8), 1104);
        assert_eq!(dct_dims(224, 224, 10, 8), 1424);
        assert_eq!(dct_dims(32, 32, 1, 8), 80);
    }

    #[test]
    fn zero_direct_genotype_decodes_to_zero() {
        let l = DirectLayout::new(5, 4, 3, 2, 50.0);
        let rho = l.decode(&vec![0.0; l.len()]).unwrap();
        assert!(rho.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn direct_decode_fills_blocks() {
        let l = DirectLayout::new(3, 3, 1, 2, 50.0);
        // blocks: (0,0) (1,0) / (0,1) (1,1)
        let rho = l.decode(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(rho.data(), &[1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 3.0, 3.0, 4.0]);
        let luma = DirectLayout::new(2, 1, 3, 1, 50.0).luma();
        assert_eq!(luma.decode(&[5.0, -1.0]).unwrap().data(), &[5.0, 5.0, 5.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn direct_decode_rejects_wrong_length() {
        let l = DirectLayout::new(4, 4, 3, 1, 50.0);
        assert!(matches!(l.decode(&[0.0; 3]), Err(EncodingError::LengthMismatch { .. })));
    }

    #[test]
    fn dct_zero_pattern_barely_changes_the_image() {
        let clean = textured(20, 13, 3);
        let l = DctLayout::new(20, 13, 3, 2);
        let rho = l.decode(&vec![0.0; l.len()], &clean).unwrap();
        assert!(rho.data().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn dct_dc_offset_shifts_one_block_uniformly() {
        let clean = Image::filled(16, 16, 1, 100.0);
        let l = DctLayout::new(16, 16, 1, 1);
        let mut g = vec![0.0; l.len()];
        g[1] = 1.0; // block (1, 0) selects pattern 1
        g[l.n_selectors()] = 8.0; // DC of pattern 1
        let rho = l.decode(&g, &clean).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                let expected = if y < 8 && x >= 8 { 1.0 } else { 0.0 };
                assert_eq!(rho.data()[y * 16 + x], expected, "({x},{y})");
            }
        }
    }

    #[test]
    fn dct_dc_offset_on_rgb_shifts_all_channels() {
        let clean = textured(8, 8, 3);
        let l = DctLayout::new(8, 8, 3, 1);
        let mut g = vec![0.0; l.len()];
        g[0] = 1.5;
        g[1] = 80.0; // DC +80 -> +10 intensity
        let mut l = l;
        l.coefficient_bound = 100.0;
        let rho = l.decode(&g, &clean).unwrap();
        for v in rho.data() {
            assert!((v - 10.0).abs() <= 1.0, "{v}");
        }
    }

    #[test]
    fn identical_patterns_decode_identically() {
        let clean = textured(16, 16, 3);
        let l = DctLayout::new(16, 16, 3, 2);
        let n_sel = l.n_selectors();
        let mut base = vec![0.0; l.len()];
        for k in 0..l.pattern_len() {
            let v = ((k * 7) % 11) as f64 - 5.0;
            base[n_sel + k] = v;
            base[n_sel + l.pattern_len() + k] = v;
        }
        let mut all_one = base.clone();
        let mut mixed = base.clone();
        for b in 0..n_sel {
            all_one[b] = 1.2;
            mixed[b] = if b % 2 == 0 { 1.2 } else { 2.7 };
        }
        assert_eq!(l.decode(&all_one, &clean).unwrap(), l.decode(&mixed, &clean).unwrap());
    }

    #[test]
    fn dct_decode_rejects_wrong_image() {
        let l = DctLayout::new(16, 16, 3, 1);
        let img = Image::filled(8, 8, 3, 0.0);
        assert!(matches!(l.decode(&vec![0.0; l.len()], &img), Err(EncodingError::ImageMismatch { .. })));
    }

    #[test]
    fn pattern_index_floors_and_clamps() {
        let l = DctLayout::new(8, 8, 1, 3);
        assert_eq!(l.pattern_index(0.0), 0);
        assert_eq!(l.pattern_index(0.999), 0);
        assert_eq!(l.pattern_index(1.0), 1);
        assert_eq!(l.pattern_index(3.5), 3);
        assert_eq!(l.pattern_index(4.0), 3);
        assert_eq!(l.pattern_index(-0.5), 0);
    }

    #[test]
    fn dct_bounds_layout() {
        let l = Layout::Dct(DctLayout::new(16, 8, 3, 2));
        let b = l.bounds();
        assert_eq!(b.len(), 2 + 128);
        assert_eq!((b.lower[0], b.upper[0]), (0.0, 3.0));
        assert_eq!((b.lower[2], b.upper[2]), (-30.0, 30.0));
    }

    #[test]
    fn visualization_is_mid_gray_for_zero() {
        let rho = PerturbationPattern::zeros(3, 2, 3);
        assert!(rho.visualize().data().iter().all(|&v| v == 127.5));
        let rho = PerturbationPattern::from_data(2, 1, 1, vec![4.0, -2.0]);
        assert_eq!(rho.visualize().data(), &[255.0, 127.5 - 63.75]);
        assert!(rho.to_csv().starts_with("x,y,c0\n0,0,4\n1,0,-2\n"));
    }

    proptest! {
        #[test]
        fn dct_dims_matches_layout_length(w in 1usize..300, h in 1usize..300, ap in 1usize..12, n in 2usize..17) {
            let mut l = DctLayout::new(w, h, 1, ap);
            l.n_dct = n;
            let g = vec![0.0; l.len()];
            prop_assert_eq!(l.selectors(&g).len() + ap * n * n, dct_dims(w, h, ap, n));
            prop_assert_eq!(l.bounds_len(), dct_dims(w, h, ap, n));
        }

        #[test]
        fn direct_decode_is_linear(vals in proptest::collection::vec(-50.0f64..50.0, 12), a in -2.0f64..2.0) {
            let l = DirectLayout::new(5, 5, 3, 3, 200.0);
            let scaled: Vec<f64> = vals.iter().map(|v| a * v).collect();
            let lhs = l.decode(&scaled).unwrap();
            let rhs = l.decode(&vals).unwrap();
            for (x, y) in lhs.data().iter().zip(rhs.data()) {
                prop_assert!((x - a * y).abs() < 1e-12);
            }
        }

        #[test]
        fn l0_counts_block_footprints(mask in proptest::collection::vec(any::<bool>(), 9), bs in 1usize..5) {
            let (w, h) = (7, 8);
            let l = DirectLayout::new(w, h, 3, bs, 200.0);
            let mut g = vec![0.0; l.len()];
            let mut expected = 0;
            for by in 0..l.blocks_y() {
                for bx in 0..l.blocks_x() {
                    let k = (by * l.blocks_x() + bx) % mask.len();
                    if mask[k] {
                        g[l.index(bx, by, k % 3)] = 7.0;
                        let bw = (w - bx * bs).min(bs);
                        let bh = (h - by * bs).min(bs);
                        expected += bw * bh;
                    }
                }
            }
            let rho = l.decode(&g).unwrap();
            let nonzero = rho.data().chunks_exact(3).filter(|px| px.iter().any(|&v| v != 0.0)).count();
            prop_assert_eq!(nonzero, expected);
        }

        #[test]
        fn changing_one_selector_is_block_local(block in 0usize..6, sel in 1.0f64..3.0) {
            let clean = textured(24, 16, 3);
            let l = DctLayout::new(24, 16, 3, 2);
            let mut g = vec![0.0; l.len()];
            for k in 0..2 * l.pattern_len() {
                g[l.n_selectors() + k] = ((k * 13) % 21) as f64 - 10.0;
            }
            let before = l.decode(&g, &clean).unwrap();
            g[block] = sel;
            let after = l.decode(&g, &clean).unwrap();
            let (bx, by) = (block % l.blocks_x(), block / l.blocks_x());
            for y in 0..16 {
                for x in 0..24 {
                    let inside = x / 8 == bx && y / 8 == by;
                    if !inside {
                        for c in 0..3 {
                            let i = (y * 24 + x) * 3 + c;
                            prop_assert_eq!(before.data()[i], after.data()[i]);
                        }
                    }
                }
            }
        }
    }

    impl DctLayout {
        fn bounds_len(&self) -> usize {
            Layout::Dct(self.clone()).bounds().len()
        }
    }
}
