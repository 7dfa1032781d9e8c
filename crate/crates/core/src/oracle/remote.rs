//! HTTP client for the JSON classification protocol.
//!
//! * `GET  /v1/info` → `{"model_id", "input": {"width","height","channels"}, "batch": bool}`
//! * `POST /v1/classify` with `{"image": {...}}` → `{"model_id", "classes": [...]}`
//! * `POST /v1/classify_batch` with `{"images": [...]}` → `{"results": [...]}`

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, ClassificationResult, ModelInfo, OracleError};
use crate::imaging::Image;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_retries() -> u32 {
    2
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), timeout_ms: default_timeout_ms(), retries: default_retries() }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct WireImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl From<&Image> for WireImage {
    fn from(img: &Image) -> Self {
        Self { width: img.width(), height: img.height(), channels: img.channels(), data: img.data().to_vec() }
    }
}

#[derive(Debug, Deserialize)]
struct WireInput {
    width: usize,
    height: usize,
    channels: usize,
}

#[derive(Debug, Deserialize)]
struct WireInfo {
    model_id: String,
    input: WireInput,
    #[serde(default)]
    batch: bool,
}

#[derive(Debug, Serialize)]
struct ClassifyRequest<'a> {
    image: &'a WireImage,
}

#[derive(Debug, Serialize)]
struct BatchRequest<'a> {
    images: &'a [WireImage],
}

#[derive(Debug, Deserialize)]
struct BatchResponse {
    results: Vec<ClassificationResult>,
}

pub struct RemoteBackend {
    base: String,
    agent: ureq::Agent,
    retries: u32,
    info: ModelInfo,
}

impl RemoteBackend {
    /// Probes `/v1/info` and returns a client bound to the advertised model.
    pub fn connect(config: RemoteConfig) -> Result<Self, OracleError> {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        let base = config.endpoint.trim_end_matches('/').to_owned();
        let mut backend = Self {
            base,
            agent,
            retries: config.retries,
            info: ModelInfo { model_id: String::new(), width: 0, height: 0, channels: 0, batch: false },
        };
        let body = backend.request("GET", "/v1/info", None)?;
        let wire: WireInfo = parse(&body)?;
        if wire.input.width == 0 || wire.input.height == 0 || !matches!(wire.input.channels, 1 | 3) {
            return Err(OracleError::Malformed(format!("unusable input spec in /v1/info: {body}")));
        }
        backend.info = ModelInfo {
            model_id: wire.model_id,
            width: wire.input.width,
            height: wire.input.height,
            channels: wire.input.channels,
            batch: wire.batch,
        };
        Ok(backend)
    }

    fn request(&self, method: &str, path: &str, body: Option<&str>) -> Result<String, OracleError> {
        let url = format!("{}{}", self.base, path);
        let mut attempts = 0;
        loop {
            attempts += 1;
            let result = match body {
                Some(b) => self
                    .agent
                    .request(method, &url)
                    .set("Content-Type", "application/json")
                    .send_string(b),
                None => self.agent.request(method, &url).call(),
            };
            let err = match result {
                Ok(resp) => {
                    return resp
                        .into_string()
                        .map_err(|e| classify_io(&e, attempts));
                }
                Err(ureq::Error::Status(status, resp)) => OracleError::Status {
                    status,
                    body: resp.into_string().unwrap_or_default(),
                    attempts,
                },
                Err(ureq::Error::Transport(t)) => classify_transport(&t, attempts),
            };
            if !err.is_retryable() || attempts > self.retries {
                return Err(err);
            }
        }
    }
}

fn classify_transport(t: &ureq::Transport, attempts: u32) -> OracleError {
    let message = t.to_string();
    let timed_out = std::error::Error::source(t)
        .and_then(|s| s.downcast_ref::<std::io::Error>())
        .map(|io| matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock))
        .unwrap_or(false)
        || message.contains("timed out");
    if timed_out {
        OracleError::Timeout { attempts }
    } else {
        OracleError::Transport { message, attempts }
    }
}

fn classify_io(e: &std::io::Error, attempts: u32) -> OracleError {
    match e.kind() {
        std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock => OracleError::Timeout { attempts },
        _ => OracleError::Transport { message: e.to_string(), attempts },
    }
}

fn parse<T: serde::de::DeserializeOwned>(body: &str) -> Result<T, OracleError> {
    serde_json::from_str(body).map_err(|e| OracleError::Malformed(format!("{e}: {}", truncate(body))))
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

impl Backend for RemoteBackend {
    fn info(&self) -> &ModelInfo {
        &self.info
    }

    fn classify(&self, image: &Image) -> Result<ClassificationResult, OracleError> {
        let wire = WireImage::from(image);
        let body = serde_json::to_string(&ClassifyRequest { image: &wire })
            .map_err(|e| OracleError::Malformed(e.to_string()))?;
        let resp = self.request("POST", "/v1/classify", Some(&body))?;
        let result: ClassificationResult = parse(&resp)?;
        result.validate()?;
        Ok(result)
    }

    fn classify_batch(&self, images: &[Image]) -> Result<Vec<ClassificationResult>, OracleError> {
        if images.is_empty() {
            return Ok(Vec::new());
        }
        if !self.info.batch {
            return images.iter().map(|img| self.classify(img)).collect();
        }
        let wire: Vec<WireImage> = images.iter().map(WireImage::from).collect();
        let body = serde_json::to_string(&BatchRequest { images: &wire })
            .map_err(|e| OracleError::Malformed(e.to_string()))?;
        let resp = self.request("POST", "/v1/classify_batch", Some(&body))?;
        let batch: BatchResponse = parse(&resp)?;
        if batch.results.len() != images.len() {
            return Err(OracleError::Malformed(format!(
                "batch of {} returned {} results",
                images.len(),
                batch.results.len()
            )));
        }
        for r in &batch.results {
            r.validate()?;
        }
        Ok(batch.results)
    }
}
