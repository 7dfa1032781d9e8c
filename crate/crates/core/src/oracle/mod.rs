//! Black-box classifier access.
//!
//! Every model is reached through a [`Backend`] that maps an image to a
//! ranked label/confidence distribution. [`Oracle`] wraps a backend with
//! input validation, quantization to 8-bit intensities, optional content
//! caching, and query accounting.

pub mod conformance;
mod mlp;
mod remote;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::Image;

pub use mlp::{Activation, DenseLayer, Mlp, MlpError, MLP_MAGIC};
pub use remote::{RemoteBackend, RemoteConfig};

/// Sum tolerance for truncated distributions.
pub const CONFIDENCE_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("image dims {actual:?} do not match model input {expected:?}")]
    DimensionMismatch { expected: (usize, usize, usize), actual: (usize, usize, usize) },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("server returned status {status} after {attempts} attempt(s): {body}")]
    Status { status: u16, body: String, attempts: u32 },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("invalid classification result: {0}")]
    InvalidResult(String),
    #[error(transparent)]
    Model(#[from] MlpError),
}

impl OracleError {
    /// Whether the failure came from the transport and may succeed on retry.
    pub fn is_retryable(&self) -> bool {
        match self {
            OracleError::Timeout { .. } | OracleError::Transport { .. } => true,
            OracleError::Status { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelConfidence {
    pub label: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub model_id: String,
    /// Descending by confidence.
    pub classes: Vec<LabelConfidence>,
}

impl ClassificationResult {
    pub fn top1(&self) -> &LabelConfidence {
        &self.classes[0]
    }

    /// Summed confidence of the given labels; labels missing from a
    /// truncated distribution count as 0.
    pub fn confidence_of<S: AsRef<str>>(&self, labels: &[S]) -> f64 {
        self.classes
            .iter()
            .filter(|c| labels.iter().any(|l| l.as_ref() == c.label))
            .map(|c| c.confidence)
            .sum()
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.classes.is_empty() {
            return Err(OracleError::InvalidResult("empty distribution".into()));
        }
        let mut sum = 0.0;
        for (k, c) in self.classes.iter().enumerate() {
            if !c.confidence.is_finite() || !(0.0..=1.0).contains(&c.confidence) {
                return Err(OracleError::InvalidResult(format!(
                    "confidence {} for {:?} outside [0, 1]",
                    c.confidence, c.label
                )));
            }
            if k > 0 && c.confidence > self.classes[k - 1].confidence {
                return Err(OracleError::InvalidResult("classes not in descending order".into()));
            }
            sum += c.confidence;
        }
        if sum > 1.0 + CONFIDENCE_SUM_TOLERANCE {
            return Err(OracleError::InvalidResult(format!("confidences sum to {sum}")));
        }
        Ok(())
    }
}

/// What a model expects and offers, as advertised by `GET /v1/info`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_id: String,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub batch: bool,
}

impl ModelInfo {
    pub fn input_dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }
}

/// A raw classifier. Implementations must be safe to query concurrently.
pub trait Backend: Send + Sync {
    fn info(&self) -> &ModelInfo;

    fn classify(&self, image: &Image) -> Result<ClassificationResult, OracleError>;

    fn classify_batch(&self, images: &[Image]) -> Result<Vec<ClassificationResult>, OracleError> {
        images.iter().map(|img| self.classify(img)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub queries: u64,
    pub cache_hits: u64,
}

pub struct Oracle {
    backend: Box<dyn Backend>,
    cache: Option<Mutex<HashMap<u64, ClassificationResult>>>,
    queries: AtomicU64,
    cache_hits: AtomicU64,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("model", self.backend.info())
            .field("cached", &self.cache.is_some())
            .field("stats", &self.stats())
            .finish()
    }
}

impl Oracle {
    pub fn new(backend: Box<dyn Backend>) -> Self {
        Self { backend, cache: None, queries: AtomicU64::new(0), cache_hits: AtomicU64::new(0) }
    }

    pub fn with_cache(mut self) -> Self {
        self.cache = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn load_builtin(path: impl AsRef<std::path::Path>) -> Result<Self, OracleError> {
        Ok(Self::new(Box::new(Mlp::load(path)?)))
    }

    pub fn connect_remote(config: RemoteConfig) -> Result<Self, OracleError> {
        Ok(Self::new(Box::new(RemoteBackend::connect(config)?)))
    }

    pub fn info(&self) -> &ModelInfo {
        self.backend.info()
    }

    pub fn stats(&self) -> OracleStats {
        OracleStats {
            queries: self.queries.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    fn prepare(&self, image: &Image) -> Result<Image, OracleError> {
        let expected = self.backend.info().input_dims();
        if image.dims() != expected {
            return Err(OracleError::DimensionMismatch { expected, actual: image.dims() });
        }
        Ok(image.clone().quantized())
    }

    pub fn classify(&self, image: &Image) -> Result<ClassificationResult, OracleError> {
        let q = self.prepare(image)?;
        let key = content_hash(&q);
        if let Some(hit) = self.cached(key) {
            return Ok(hit);
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        let result = self.backend.classify(&q)?;
        result.validate()?;
        self.store(key, &result);
        Ok(result)
    }

    /// Order-preserving; uncached images go to the backend in a single batch.
    pub fn classify_batch(&self, images: &[Image]) -> Result<Vec<ClassificationResult>, OracleError> {
        let prepared = images.iter().map(|img| self.prepare(img)).collect::<Result<Vec<_>, _>>()?;
        let keys: Vec<u64> = prepared.iter().map(content_hash).collect();
        let mut results: Vec<Option<ClassificationResult>> = keys.iter().map(|&k| self.cached(k)).collect();
        let mut pending: Vec<usize> = Vec::new();
        let mut first_of: HashMap<u64, usize> = HashMap::new();
        for (i, r) in results.iter().enumerate() {
            if r.is_none() {
                // with caching on, duplicate images in one batch are sent once
                if self.cache.is_some() && first_of.contains_key(&keys[i]) {
                    continue;
                }
                first_of.insert(keys[i], i);
                pending.push(i);
            }
        }
        if !pending.is_empty() {
            let batch: Vec<Image> = pending.iter().map(|&i| prepared[i].clone()).collect();
            self.queries.fetch_add(batch.len() as u64, Ordering::Relaxed);
            let fresh = self.backend.classify_batch(&batch)?;
            if fresh.len() != batch.len() {
                return Err(OracleError::Malformed(format!(
                    "batch of {} returned {} results",
                    batch.len(),
                    fresh.len()
                )));
            }
            for r in &fresh {
                r.validate()?;
            }
            for (&i, r) in pending.iter().zip(fresh) {
                self.store(keys[i], &r);
                results[i] = Some(r);
            }
        }
        let mut out = Vec::with_capacity(results.len());
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Some(r) => out.push(r),
                None => {
                    let j = first_of[&keys[i]];
                    self.cache_hits.fetch_add(1, Ordering::Relaxed);
                    out.push(out[j].clone());
                }
            }
        }
        Ok(out)
    }

    fn cached(&self, key: u64) -> Option<ClassificationResult> {
        let cache = self.cache.as_ref()?;
        let hit = cache.lock().expect("oracle cache poisoned").get(&key).cloned();
        if hit.is_some() {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
        }
        hit
    }

    fn store(&self, key: u64, result: &ClassificationResult) {
        if let Some(cache) = &self.cache {
            cache.lock().expect("oracle cache poisoned").insert(key, result.clone());
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the dims and the quantized intensity bytes.
pub fn content_hash(image: &Image) -> u64 {
    let (w, h, c) = image.dims();
    let mut hash = FNV_OFFSET;
    let header = [w as u64, h as u64, c as u64];
    for byte in header.iter().flat_map(|v| v.to_le_bytes()).chain(image.to_bytes()) {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}
