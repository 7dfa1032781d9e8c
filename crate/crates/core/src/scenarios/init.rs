//! Stratified initial population for the direct encoding.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::encoding::DirectLayout;

/// One stratum of the initial population.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitGroup {
    /// Upper limit on the fraction of genotype variables that are nonzero.
    pub max_fraction: f64,
    /// Nonzero values are drawn with magnitude at most `range`.
    pub range: f64,
    /// Nonzero values have magnitude at least this much.
    #[serde(default)]
    pub min_magnitude: f64,
}

/// Eight strata: sparse and strong first, dense and faint last.
pub fn default_groups() -> Vec<InitGroup> {
    let fractions = [0.005, 0.05, 0.20, 0.35, 0.50, 0.65, 0.80, 0.95];
    let ranges = [200.0, 200.0, 100.0, 50.0, 33.0, 25.0, 20.0, 16.0];
    let minimums = [150.0, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    fractions
        .iter()
        .zip(ranges)
        .zip(minimums)
        .map(|((&max_fraction, range), min_magnitude)| InitGroup { max_fraction, range, min_magnitude })
        .collect()
}

/// Splits `count` genotypes across the groups (sizes differ by at most one,
/// earlier groups take the remainder). Each member perturbs between 1 and
/// `ceil(max_fraction · len)` randomly chosen variables; all others are 0.
pub fn stratified_init<R: Rng + ?Sized>(
    layout: &DirectLayout,
    groups: &[InitGroup],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, ScenarioError> {
    if groups.is_empty() {
        return Err(ScenarioError::Config("stratified init needs at least one group".into()));
    }
    if count < groups.len() {
        return Err(ScenarioError::Config(format!(
            "stratified init needs at least {} individuals, got {count}",
            groups.len()
        )));
    }
    for g in groups {
        if !(g.max_fraction > 0.0 && g.max_fraction <= 1.0) || !(g.range > 0.0) || !(0.0..=g.range).contains(&g.min_magnitude) {
            return Err(ScenarioError::Config(format!("invalid init group {g:?}")));
        }
    }
    let len = layout.len();
    let per = count / groups.len();
    let extra = count % groups.len();
    let mut out = Vec::with_capacity(count);
    for (gi, group) in groups.iter().enumerate() {
        let size = per + usize::from(gi < extra);
        let cap = ((group.max_fraction * len as f64).ceil() as usize).clamp(1, len);
        for _ in 0..size {
            let mut g = vec![0.0; len];
            let k = rng.gen_range(1..=cap);
            for idx in sample(rng, len, k) {
                let magnitude = if group.min_magnitude < group.range {
                    rng.gen_range(group.min_magnitude..=group.range)
                } else {
                    group.range
                };
                let signed = if rng.gen::<bool>() { magnitude } else { -magnitude };
                g[idx] = signed.clamp(layout.lower, layout.upper);
            }
            out.push(g);
        }
    }
    Ok(out)
}
