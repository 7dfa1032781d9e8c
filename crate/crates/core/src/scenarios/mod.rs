//! Adversarial-example problem formulations.
//!
//! Three scenarios are provided, all minimizing:
//!
//! | kind                  | objectives                                        |
//! |-----------------------|---------------------------------------------------|
//! | `accuracy_vs_amount`  | correct-label confidence, `‖ρ‖_e`                 |
//! | `l0_vs_l1`            | `‖ρ‖_0`, `‖ρ‖_1`                                  |
//! | `robust`              | mean and std of correct-label confidence over the rotation set, `‖ρ‖_e` |
//!
//! Constraints are aggregated into a single violation amount
//! `Σ max(0, value − threshold)` (mirrored for `≥`), which the engine uses
//! for feasibility-first replacement.

mod init;

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use init::{default_groups, stratified_init, InitGroup};

use crate::encoding::{Bounds, EncodingError, Layout, PerturbationPattern};
use crate::imaging::{self, Image, ImageError};
use crate::moead::{Evaluation, Problem};
use crate::oracle::{Oracle, OracleError};

/// Margin used to turn strict comparisons into closed ones.
pub const STRICT_MARGIN: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormOrder {
    #[serde(rename = "l0")]
    L0,
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "linf")]
    Inf,
}

impl std::str::FromStr for NormOrder {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "l0" => Ok(NormOrder::L0),
            "1" | "l1" => Ok(NormOrder::L1),
            "2" | "l2" => Ok(NormOrder::L2),
            "inf" | "linf" | "∞" => Ok(NormOrder::Inf),
            other => Err(ScenarioError::Config(format!("unsupported norm order {other:?}"))),
        }
    }
}

/// How `ℓ1` is scaled.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Scale {
    /// Mean absolute delta per pixel-channel.
    #[default]
    Mean,
    /// Plain sum of absolute deltas.
    Sum,
}

/// Perturbation size. `L0` counts pixels with any nonzero channel, `L1` is
/// the mean absolute delta, `L2` the RMS delta and `Inf` the largest
/// absolute delta.
pub fn norm(rho: &PerturbationPattern, order: NormOrder) -> f64 {
    let data = rho.data();
    if data.is_empty() {
        return 0.0;
    }
    match order {
        NormOrder::L0 => data.chunks_exact(rho.channels()).filter(|px| px.iter().any(|&v| v != 0.0)).count() as f64,
        NormOrder::L1 => data.iter().map(|v| v.abs()).sum::<f64>() / data.len() as f64,
        NormOrder::L2 => (data.iter().map(|v| v * v).sum::<f64>() / data.len() as f64).sqrt(),
        NormOrder::Inf => data.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

fn l1(rho: &PerturbationPattern, scale: L1Scale) -> f64 {
    match scale {
        L1Scale::Mean => norm(rho, NormOrder::L1),
        L1Scale::Sum => rho.data().iter().map(|v| v.abs()).sum(),
    }
}

/// Population mean and standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    AccuracyVsAmount,
    L0VsL1,
    Robust,
}

impl ScenarioKind {
    pub fn n_objectives(self) -> usize {
        match self {
            ScenarioKind::AccuracyVsAmount | ScenarioKind::L0VsL1 => 2,
            ScenarioKind::Robust => 3,
        }
    }

    pub fn objective_names(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::AccuracyVsAmount => &["confidence", "amount"],
            ScenarioKind::L0VsL1 => &["l0", "l1"],
            ScenarioKind::Robust => &["mean_confidence", "std_confidence", "amount"],
        }
    }
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Correct-label confidence on the untransformed perturbed image.
    CorrectConfidence,
    /// Mean correct-label confidence over the transformation set.
    ExpectedCorrectConfidence,
    /// `‖ρ‖_e` with the scenario's norm order.
    Norm,
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub metric: Metric,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl Constraint {
    pub fn new(metric: Metric, comparator: Comparator, threshold: f64) -> Self {
        Self { metric, comparator, threshold }
    }

    /// How far `value` is from satisfying the constraint; 0 when satisfied.
    pub fn violation(&self, value: f64) -> f64 {
        let t = self.threshold;
        match self.comparator {
            Comparator::Le => (value - t).max(0.0),
            Comparator::Lt => (value - (t - STRICT_MARGIN)).max(0.0),
            Comparator::Ge => (t - value).max(0.0),
            Comparator::Gt => ((t + STRICT_MARGIN) - value).max(0.0),
        }
    }
}

pub fn default_rotations() -> Vec<f64> {
    (-4..=4).map(|k| 15.0 * k as f64).collect()
}

/// What to optimize: objectives, constraints, labels and transformations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub norm: NormOrder,
    pub l1_scale: L1Scale,
    pub constraints: Vec<Constraint>,
    /// Labels whose confidences are summed as "correct".
    pub correct_labels: Vec<String>,
    /// Rotation angles in degrees (robust scenario only).
    pub rotations: Vec<f64>,
}

impl ScenarioSpec {
    pub fn accuracy_vs_amount(correct_labels: Vec<String>, norm: NormOrder) -> Self {
        Self {
            kind: ScenarioKind::AccuracyVsAmount,
            norm,
            l1_scale: L1Scale::Mean,
            constraints: Vec::new(),
            correct_labels,
            rotations: Vec::new(),
        }
    }

    /// `ℓ0` vs `ℓ1`, subject to correct confidence `< t_acc`.
    pub fn l0_vs_l1(correct_labels: Vec<String>, t_acc: f64) -> Self {
        Self {
            kind: ScenarioKind::L0VsL1,
            norm: NormOrder::L1,
            l1_scale: L1Scale::Mean,
            constraints: vec![Constraint::new(Metric::CorrectConfidence, Comparator::Lt, t_acc)],
            correct_labels,
            rotations: Vec::new(),
        }
    }

    /// Rotation-robust attack with unrotated confidence `< 0.1` and
    /// expected confidence `< 0.5` over −60°…60° in 15° steps.
    pub fn robust(correct_labels: Vec<String>, norm: NormOrder) -> Self {
        Self {
            kind: ScenarioKind::Robust,
            norm,
            l1_scale: L1Scale::Mean,
            constraints: vec![
                Constraint::new(Metric::CorrectConfidence, Comparator::Lt, 0.1),
                Constraint::new(Metric::ExpectedCorrectConfidence, Comparator::Lt, 0.5),
            ],
            correct_labels,
            rotations: default_rotations(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |m: String| Err(ScenarioError::Config(m));
        if self.correct_labels.is_empty() {
            return fail("at least one correct label is required".into());
        }
        for c in &self.constraints {
            if !c.threshold.is_finite() {
                return fail(format!("non-finite constraint threshold in {c:?}"));
            }
        }
        if self.kind == ScenarioKind::Robust {
            if self.rotations.is_empty() {
                return fail("the robust scenario needs at least one rotation angle".into());
            }
            if self.rotations.iter().any(|a| !a.is_finite() || a.abs() > 180.0) {
                return fail("rotation angles must lie in [-180, 180]".into());
            }
            let uses_unrotated = self.constraints.iter().any(|c| c.metric == Metric::CorrectConfidence);
            if uses_unrotated && !self.rotations.contains(&0.0) {
                return fail("an unrotated-confidence constraint needs 0 in the rotation set".into());
            }
        }
        Ok(())
    }

    pub fn queries_per_candidate(&self) -> u64 {
        match self.kind {
            ScenarioKind::Robust => self.rotations.len() as u64,
            _ => 1,
        }
    }
}

/// Initial population strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Initializer {
    /// Uniform inside the genotype bounds.
    Uniform,
    /// Sparse-to-dense strata (direct encoding only).
    Stratified { groups: Vec<InitGroup> },
}

/// Full evaluation record of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub objectives: Vec<f64>,
    pub violation: f64,
    /// Correct-label confidence per transformation (one entry when unrotated).
    pub confidences: Vec<f64>,
    pub perturbation: f64,
}

pub struct ScenarioProblem {
    spec: ScenarioSpec,
    layout: Layout,
    bounds: Bounds,
    clean: Image,
    oracle: Arc<Oracle>,
    init: Initializer,
}

impl std::fmt::Debug for ScenarioProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScenarioProblem").field("spec", &self.spec).field("layout", &self.layout).finish()
    }
}

impl ScenarioProblem {
    /// `clean` is rounded to integer intensities, like every image the
    /// classifier receives.
    pub fn new(spec: ScenarioSpec, layout: Layout, clean: Image, oracle: Arc<Oracle>) -> Result<Self, ScenarioError> {
        spec.validate()?;
        layout.validate()?;
        if layout.image_dims() != clean.dims() {
            return Err(ScenarioError::Config(format!(
                "encoding dims {:?} differ from image {:?}",
                layout.image_dims(),
                clean.dims()
            )));
        }
        if oracle.info().input_dims() != clean.dims() {
            return Err(ScenarioError::Config(format!(
                "model expects {:?}, image is {:?}",
                oracle.info().input_dims(),
                clean.dims()
            )));
        }
        let bounds = layout.bounds();
        let clean = clean.quantized();
        Ok(Self { spec, layout, bounds, clean, oracle, init: Initializer::Uniform })
    }

    pub fn with_initializer(mut self, init: Initializer) -> Result<Self, ScenarioError> {
        if matches!(init, Initializer::Stratified { .. }) && !matches!(self.layout, Layout::Direct(_)) {
            return Err(ScenarioError::Config("stratified init requires the direct encoding".into()));
        }
        self.init = init;
        Ok(self)
    }

    /// Checks that a population of `size` (zero genotype included) suits the initializer.
    pub fn check_population(&self, size: usize) -> Result<(), ScenarioError> {
        if let Initializer::Stratified { groups } = &self.init {
            if groups.is_empty() || size < groups.len() + 1 {
                return Err(ScenarioError::Config(format!(
                    "stratified init with {} groups needs a population of at least {}",
                    groups.len(),
                    groups.len() + 1
                )));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn clean(&self) -> &Image {
        &self.clean
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn decode(&self, genotype: &[f64]) -> Result<PerturbationPattern, ScenarioError> {
        Ok(self.layout.decode(genotype, &self.clean)?)
    }

    /// The perturbed image as the classifier sees it (clamped and rounded to
    /// integer intensities) and the effective perturbation `perturbed − clean`
    /// that the norms are computed on.
    pub fn render(&self, genotype: &[f64]) -> Result<(PerturbationPattern, Image), ScenarioError> {
        let raw = self.decode(genotype)?;
        let perturbed = raw.apply_to(&self.clean)?.quantized();
        let data = perturbed.data().iter().zip(self.clean.data()).map(|(p, c)| p - c).collect();
        let (w, h, c) = self.clean.dims();
        Ok((PerturbationPattern::from_data(w, h, c, data), perturbed))
    }

    pub fn assess(&self, genotype: &[f64]) -> Result<Assessment, ScenarioError> {
        let (rho, perturbed) = self.render(genotype)?;
        let labels = &self.spec.correct_labels;
        let confidences: Vec<f64> = match self.spec.kind {
            ScenarioKind::Robust => {
                // perturb, clamp, then rotate
                let views: Vec<Image> = self.spec.rotations.iter().map(|&a| imaging::rotate(&perturbed, a)).collect();
                self.oracle.classify_batch(&views)?.iter().map(|r| r.confidence_of(labels)).collect()
            }
            _ => vec![self.oracle.classify(&perturbed)?.confidence_of(labels)],
        };
        let amount = norm(&rho, self.spec.norm);
        let (mean, std) = mean_and_std(&confidences);
        let unrotated = match self.spec.kind {
            ScenarioKind::Robust => self
                .spec
                .rotations
                .iter()
                .position(|&a| a == 0.0)
                .map(|k| confidences[k])
                .unwrap_or(mean),
            _ => confidences[0],
        };
        let objectives = match self.spec.kind {
            ScenarioKind::AccuracyVsAmount => vec![unrotated, amount],
            ScenarioKind::L0VsL1 => vec![norm(&rho, NormOrder::L0), l1(&rho, self.spec.l1_scale)],
            ScenarioKind::Robust => vec![mean, std, amount],
        };
        let violation = self
            .spec
            .constraints
            .iter()
            .map(|c| {
                let value = match c.metric {
                    Metric::CorrectConfidence => unrotated,
                    Metric::ExpectedCorrectConfidence => mean,
                    Metric::Norm => amount,
                };
                c.violation(value)
            })
            .fold(0.0, |acc, v| acc + v);
        Ok(Assessment { objectives, violation, confidences, perturbation: amount })
    }
}

impl Problem for ScenarioProblem {
    type Error = ScenarioError;

    fn n_objectives(&self) -> usize {
        self.spec.kind.n_objectives()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, genotype: &[f64]) -> Result<Evaluation, ScenarioError> {
        let a = self.assess(genotype)?;
        Ok(Evaluation { objectives: a.objectives, violation: a.violation })
    }

    fn queries_per_evaluation(&self) -> u64 {
        self.spec.queries_per_candidate()
    }

    fn initial_genotypes(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        match (&self.init, &self.layout) {
            (Initializer::Stratified { groups }, Layout::Direct(layout)) => {
                // validated in with_initializer; config errors surface there
                stratified_init(layout, groups, count, rng).unwrap_or_else(|_| uniform(&self.bounds, count, rng))
            }
            _ => uniform(&self.bounds, count, rng),
        }
    }
}

fn uniform(bounds: &Bounds, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    use rand::Rng;
    (0..count)
        .map(|_| {
            (0..bounds.len())
                .map(|k| {
                    let (lo, hi) = (bounds.lower[k], bounds.upper[k]);
                    if lo < hi { rng.gen_range(lo..=hi) } else { lo }
                })
                .collect()
        })
        .collect()
}
