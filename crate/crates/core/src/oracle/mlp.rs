//! Forward-only affine-stack classifier loaded from an `AEMLP01` weight file.
//!
//! File layout (all integers `u32`, all reals `f32`, little-endian):
//!
//! ```text
//! magic            8 bytes  "AEMLP01\0"
//! input_w, input_h, channels
//! label_count, then per label: byte_len, UTF-8 bytes
//! layer_count, then per layer:
//!     rows, cols, activation (u8: 0 = none, 1 = ReLU)
//!     rows·cols weights (row-major), rows biases
//! ```
//!
//! The input vector is the image buffer as stored (raw `0..=255`
//! intensities, row-major, channels interleaved). The last layer's outputs
//! are passed through a softmax.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{Backend, ClassificationResult, LabelConfidence, ModelInfo, OracleError};
use crate::imaging::Image;

pub const MLP_MAGIC: &[u8; 8] = b"AEMLP01\0";

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: not an AEMLP01 weight file")]
    BadMagic,
    #[error("file truncated while reading {0}")]
    Truncated(String),
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("layer {layer}: non-finite {what}")]
    NonFinite { layer: usize, what: &'static str },
    #[error("invalid label table: {0}")]
    Labels(String),
    #[error("layer {layer}: unknown activation code {code}")]
    Activation { layer: usize, code: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
}

impl Activation {
    fn code(self) -> u8 {
        match self {
            Activation::None => 0,
            Activation::Relu => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub rows: usize,
    pub cols: usize,
    pub activation: Activation,
    pub weights: Vec<f32>,
    pub biases: Vec<f32>,
}

impl DenseLayer {
    fn forward(&self, input: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let row = &self.weights[r * self.cols..(r + 1) * self.cols];
                let z = row.iter().zip(input).map(|(&w, &x)| w as f64 * x).sum::<f64>() + self.biases[r] as f64;
                match self.activation {
                    Activation::None => z,
                    Activation::Relu => z.max(0.0),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Mlp {
    info: ModelInfo,
    labels: Vec<String>,
    layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(
        model_id: impl Into<String>,
        input: (usize, usize, usize),
        labels: Vec<String>,
        layers: Vec<DenseLayer>,
    ) -> Result<Self, MlpError> {
        let (width, height, channels) = input;
        let info = ModelInfo { model_id: model_id.into(), width, height, channels, batch: true };
        let mlp = Self { info, labels, layers };
        mlp.check()?;
        Ok(mlp)
    }

    fn check(&self) -> Result<(), MlpError> {
        if self.labels.is_empty() {
            return Err(MlpError::Labels("no labels".into()));
        }
        if self.layers.is_empty() {
            return Err(MlpError::Dimension("no layers".into()));
        }
        let mut width = self.info.width * self.info.height * self.info.channels;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.cols != width {
                return Err(MlpError::Dimension(format!(
                    "layer {k} expects {} inputs but receives {width}",
                    layer.cols
                )));
            }
            if layer.weights.len() != layer.rows * layer.cols || layer.biases.len() != layer.rows {
                return Err(MlpError::Dimension(format!("layer {k} parameter count")));
            }
            if layer.weights.iter().any(|w| !w.is_finite()) {
                return Err(MlpError::NonFinite { layer: k, what: "weight" });
            }
            if layer.biases.iter().any(|b| !b.is_finite()) {
                return Err(MlpError::NonFinite { layer: k, what: "bias" });
            }
            width = layer.rows;
        }
        if width != self.labels.len() {
            return Err(MlpError::Dimension(format!(
                "output width {width} does not match {} labels",
                self.labels.len()
            )));
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MlpError> {
        let bytes = fs::read(path.as_ref())?;
        let model_id = path
            .as_ref()
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "builtin".into());
        Self::from_bytes(&bytes, model_id)
    }

    pub fn from_bytes(bytes: &[u8], model_id: impl Into<String>) -> Result<Self, MlpError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8, "magic")? != MLP_MAGIC {
            return Err(MlpError::BadMagic);
        }
        let width = r.u32("input width")? as usize;
        let height = r.u32("input height")? as usize;
        let channels = r.u32("channel count")? as usize;
        let n_labels = r.u32("label count")? as usize;
        let mut labels = Vec::with_capacity(n_labels.min(1 << 16));
        for k in 0..n_labels {
            let len = r.u32(&format!("label {k} length"))? as usize;
            let raw = r.take(len, &format!("label {k}"))?;
            let label = std::str::from_utf8(raw).map_err(|_| MlpError::Labels(format!("label {k} is not UTF-8")))?;
            labels.push(label.to_owned());
        }
        let n_layers = r.u32("layer count")? as usize;
        let mut layers = Vec::with_capacity(n_layers.min(1 << 10));
        for k in 0..n_layers {
            let rows = r.u32(&format!("layer {k} rows"))? as usize;
            let cols = r.u32(&format!("layer {k} cols"))? as usize;
            let code = r.take(1, &format!("layer {k} activation"))?[0];
            let activation = match code {
                0 => Activation::None,
                1 => Activation::Relu,
                code => return Err(MlpError::Activation { layer: k, code }),
            };
            let count = rows
                .checked_mul(cols)
                .ok_or_else(|| MlpError::Dimension(format!("layer {k} is too large")))?;
            let weights = r.f32s(count, &format!("layer {k} weights"))?;
            let biases = r.f32s(rows, &format!("layer {k} biases"))?;
            layers.push(DenseLayer { rows, cols, activation, weights, biases });
        }
        if r.pos != bytes.len() {
            return Err(MlpError::Dimension(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Self::new(model_id, (width, height, channels), labels, layers)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MLP_MAGIC.to_vec();
        for v in [self.info.width, self.info.height, self.info.channels, self.labels.len()] {
            out.extend((v as u32).to_le_bytes());
        }
        for label in &self.labels {
            out.extend((label.len() as u32).to_le_bytes());
            out.extend(label.as_bytes());
        }
        out.extend((self.layers.len() as u32).to_le_bytes());
        for layer in &self.layers {
            out.extend((layer.rows as u32).to_le_bytes());
            out.extend((layer.cols as u32).to_le_bytes());
            out.push(layer.activation.code());
            for w in layer.weights.iter().chain(&layer.biases) {
                out.extend(w.to_le_bytes());
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MlpError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Raw output-layer values before the softmax.
    pub fn logits(&self, input: &[f64]) -> Vec<f64> {
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer.forward(&x);
        }
        x
    }

    pub fn probabilities(&self, input: &[f64]) -> Vec<f64> {
        softmax(&self.logits(input))
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl Backend for Mlp {
    fn info(&self) -> &ModelInfo {
        &self.info
    }

    fn classify(&self, image: &Image) -> Result<ClassificationResult, OracleError> {
        let expected = self.info.input_dims();
        if image.dims() != expected {
            return Err(OracleError::DimensionMismatch { expected, actual: image.dims() });
        }
        let probs = self.probabilities(image.data());
        let mut order: Vec<usize> = (0..probs.len()).collect();
        // stable: equal confidences keep label-table order
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
        let classes = order
            .into_iter()
            .map(|k| LabelConfidence { label: self.labels[k].clone(), confidence: probs[k] })
            .collect();
        Ok(ClassificationResult { model_id: self.info.model_id.clone(), classes })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], MlpError> {
        if self.bytes.len() - self.pos < n {
            return Err(MlpError::Truncated(what.to_owned()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, MlpError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f32>, MlpError> {
        let len = n.checked_mul(4).ok_or_else(|| MlpError::Truncated(what.to_owned()))?;
        let raw = self.take(len, what)?;
        Ok(raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
    }
}
