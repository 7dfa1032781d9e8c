//! Protocol conformance checks runnable against any classification endpoint.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Backend, OracleError, RemoteBackend, RemoteConfig};
use crate::imaging::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ConformanceReport {
    pub checks: Vec<CheckOutcome>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &'static str, result: Result<String, String>) {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckOutcome { name, passed, detail });
    }
}

impl std::fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn random_image(rng: &mut ChaCha8Rng, dims: (usize, usize, usize)) -> Image {
    let (w, h, c) = dims;
    let data = (0..w * h * c).map(|_| rng.gen_range(0..=255u8) as f64).collect();
    Image::new(w, h, c, data).expect("dims from model info")
}

/// Runs the protocol checks. When `reference` is given, `samples` random
/// images are also compared against it with confidence tolerance `tol`.
pub fn run(
    config: &RemoteConfig,
    reference: Option<(&dyn Backend, usize, f64)>,
) -> ConformanceReport {
    let mut report = ConformanceReport::default();
    let backend = match RemoteBackend::connect(config.clone()) {
        Ok(b) => {
            let i = b.info();
            report.record("info", Ok(format!("{} {}x{}x{} batch={}", i.model_id, i.width, i.height, i.channels, i.batch)));
            b
        }
        Err(e) => {
            report.record("info", Err(e.to_string()));
            return report;
        }
    };
    let dims = backend.info().input_dims();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probes: Vec<Image> = std::iter::once(Image::filled(dims.0, dims.1, dims.2, 128.0))
        .chain((0..3).map(|_| random_image(&mut rng, dims)))
        .collect();

    let singles: Result<Vec<_>, OracleError> = probes.iter().map(|p| backend.classify(p)).collect();
    let singles = match singles {
        Ok(s) => {
            report.record("classify", Ok(format!("{} valid responses", s.len())));
            s
        }
        Err(e) => {
            report.record("classify", Err(e.to_string()));
            return report;
        }
    };

    report.record(
        "determinism",
        match backend.classify(&probes[1]) {
            Ok(again) if again == singles[1] => Ok("repeat request identical".into()),
            Ok(_) => Err("repeat request returned a different distribution".into()),
            Err(e) => Err(e.to_string()),
        },
    );

    if backend.info().batch {
        report.record(
            "batch_single_equivalence",
            match backend.classify_batch(&probes[..1]) {
                Ok(b) if b.len() == 1 && b[0] == singles[0] => Ok("batch of one equals classify".into()),
                Ok(_) => Err("batch of one differs from classify".into()),
                Err(e) => Err(e.to_string()),
            },
        );
        report.record(
            "batch_order",
            match backend.classify_batch(&probes) {
                Ok(b) if b == singles => Ok(format!("{} results in request order", b.len())),
                Ok(b) => Err(format!("{} results, not matching per-image answers", b.len())),
                Err(e) => Err(e.to_string()),
            },
        );
        report.record(
            "empty_batch",
            match backend.classify_batch(&[]) {
                Ok(b) if b.is_empty() => Ok("empty in, empty out".into()),
                Ok(b) => Err(format!("{} results for an empty batch", b.len())),
                Err(e) => Err(e.to_string()),
            },
        );
    }

    report.record("rejects_malformed", malformed_is_rejected(config));

    if let Some((reference, samples, tol)) = reference {
        report.record("reference_match", compare(&backend, reference, samples, tol, &mut rng));
    }
    report
}

fn malformed_is_rejected(config: &RemoteConfig) -> Result<String, String> {
    let agent = ureq::AgentBuilder::new().timeout(Duration::from_millis(config.timeout_ms)).build();
    let url = format!("{}/v1/classify", config.endpoint.trim_end_matches('/'));
    match agent.post(&url).set("Content-Type", "application/json").send_string("{\"image\": ") {
        Err(ureq::Error::Status(code, _)) if (400..500).contains(&code) => Ok(format!("status {code}")),
        Err(ureq::Error::Status(code, _)) => Err(format!("expected 4xx, got {code}")),
        Ok(resp) => Err(format!("expected 4xx, got {}", resp.status())),
        Err(e) => Err(e.to_string()),
    }
}

fn compare(
    remote: &RemoteBackend,
    reference: &dyn Backend,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<String, String> {
    let dims = remote.info().input_dims();
    if reference.info().input_dims() != dims {
        return Err(format!("input dims differ: {:?} vs {:?}", dims, reference.info().input_dims()));
    }
    let mut worst = 0.0f64;
    for k in 0..samples {
        let img = random_image(rng, dims);
        let a = remote.classify(&img).map_err(|e| e.to_string())?;
        let b = reference.classify(&img).map_err(|e| e.to_string())?;
        for class in &b.classes {
            let theirs = a.confidence_of(&[&class.label]);
            // truncated remote distributions may omit tiny classes
            if theirs == 0.0 && class.confidence < tol {
                continue;
            }
            let diff = (theirs - class.confidence).abs();
            worst = worst.max(diff);
            if diff > tol {
                return Err(format!("sample {k}: {:?} differs by {diff:e}", class.label));
            }
        }
    }
    Ok(format!("{samples} samples, max deviation {worst:e}"))
}
