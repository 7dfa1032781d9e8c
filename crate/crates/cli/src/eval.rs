//! `aegen eval`: recognition results of a clean image and an adversarial
//! example under rotation.

use std::fmt::Write as _;

use aegen_core::imaging::{rotate, Image};
use aegen_core::oracle::{ClassificationResult, Oracle};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRow {
    pub angle: f64,
    pub clean_label: String,
    pub clean_confidence: f64,
    pub clean_correct: f64,
    pub ae_label: String,
    pub ae_confidence: f64,
    pub ae_correct: f64,
}

/// Classifies both images at every angle. `correct` defaults to the clean
/// image's unrotated top-1 label.
pub fn eval_robustness(
    oracle: &Oracle,
    clean: &Image,
    ae: &Image,
    angles: &[f64],
    correct: Option<&[String]>,
) -> Result<(Vec<String>, Vec<RobustnessRow>), CliError> {
    if clean.dims() != ae.dims() {
        return Err(CliError::config(format!("image dims differ: {:?} vs {:?}", clean.dims(), ae.dims())));
    }
    if let Some(bad) = angles.iter().find(|a| !a.is_finite() || a.abs() > 180.0) {
        return Err(CliError::config(format!("angle {bad} outside [-180, 180]")));
    }
    let correct: Vec<String> = match correct {
        Some(labels) if !labels.is_empty() => labels.to_vec(),
        _ => vec![oracle.classify(clean)?.top1().label.clone()],
    };
    let views = |img: &Image| -> Vec<Image> { angles.iter().map(|&a| rotate(img, a)).collect() };
    let clean_results = oracle.classify_batch(&views(clean))?;
    let ae_results = oracle.classify_batch(&views(ae))?;
    let rows = angles
        .iter()
        .zip(clean_results.iter().zip(&ae_results))
        .map(|(&angle, (c, a))| row(angle, c, a, &correct))
        .collect();
    Ok((correct, rows))
}

fn row(angle: f64, clean: &ClassificationResult, ae: &ClassificationResult, correct: &[String]) -> RobustnessRow {
    RobustnessRow {
        angle,
        clean_label: clean.top1().label.clone(),
        clean_confidence: clean.top1().confidence,
        clean_correct: clean.confidence_of(correct),
        ae_label: ae.top1().label.clone(),
        ae_confidence: ae.top1().confidence,
        ae_correct: ae.confidence_of(correct),
    }
}

pub fn to_csv(rows: &[RobustnessRow]) -> String {
    let mut out = String::from("angle,clean_label,clean_confidence,clean_correct,ae_label,ae_confidence,ae_correct\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.angle, r.clean_label, r.clean_confidence, r.clean_correct, r.ae_label, r.ae_confidence, r.ae_correct
        )
        .ok();
    }
    out
}

pub fn to_text(correct: &[String], rows: &[RobustnessRow]) -> String {
    let mut out = format!("correct labels: {}\n", correct.join(", "));
    writeln!(out, "{:>7}  {:<24} {:>8}  {:<24} {:>8}", "angle", "clean top-1", "correct", "AE top-1", "correct").ok();
    for r in rows {
        let clean = format!("{} {:.1}%", r.clean_label, 100.0 * r.clean_confidence);
        let ae = format!("{} {:.1}%", r.ae_label, 100.0 * r.ae_confidence);
        writeln!(
            out,
            "{:>5} deg  {:<24} {:>7.1}%  {:<24} {:>7.1}%",
            r.angle,
            clean,
            100.0 * r.clean_correct,
            ae,
            100.0 * r.ae_correct
        )
        .ok();
    }
    out
}
