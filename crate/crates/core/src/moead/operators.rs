//! Scalarization, variation and replacement primitives.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Individual, MoeadError, Subproblem, WeightVector};
use crate::encoding::Bounds;

/// `max_i λ_i · |f_i − z_i|`.
pub fn tchebycheff(f: &[f64], lambda: &WeightVector, z: &[f64]) -> f64 {
    let lambda = lambda.as_slice();
    assert!(
        f.len() == lambda.len() && f.len() == z.len(),
        "objective, weight and reference lengths differ: {} / {} / {}",
        f.len(),
        lambda.len(),
        z.len()
    );
    f.iter()
        .zip(lambda)
        .zip(z)
        .map(|((fi, li), zi)| li * (fi - zi).abs())
        .fold(0.0, f64::max)
}

/// Componentwise `z_j ← min(z_j, f_j)`.
pub fn update_reference(z: &mut [f64], f: &[f64]) {
    assert_eq!(z.len(), f.len(), "reference and objective lengths differ");
    for (zj, &fj) in z.iter_mut().zip(f) {
        if fj < *zj {
            *zj = fj;
        }
    }
}

/// Neighborhood with probability `delta`, otherwise every subproblem.
pub fn choose_mating_pool<R: Rng + ?Sized>(neighbors: &[usize], population: usize, delta: f64, rng: &mut R) -> Vec<usize> {
    if rng.gen::<f64>() < delta {
        neighbors.to_vec()
    } else {
        (0..population).collect()
    }
}

/// Two distinct members of `pool`, both different from `current`. Falls back
/// to the whole population when the pool is too small.
pub fn pick_donors<R: Rng + ?Sized>(pool: &[usize], current: usize, population: usize, rng: &mut R) -> (usize, usize) {
    let mut candidates: Vec<usize> = pool.iter().copied().filter(|&k| k != current).collect();
    if candidates.len() < 2 {
        candidates = (0..population).filter(|&k| k != current).collect();
    }
    let picked: Vec<usize> = candidates.choose_multiple(rng, 2).copied().collect();
    (picked[0], picked[1])
}

/// DE recombination: coordinate `k` becomes `x1_k + F (x2_k − x3_k)` with
/// probability `cr`, else `x1_k`; the result is clamped into `bounds`.
pub fn de_crossover<R: Rng + ?Sized>(
    x1: &[f64],
    x2: &[f64],
    x3: &[f64],
    cr: f64,
    f: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> Vec<f64> {
    assert!(
        x1.len() == x2.len() && x2.len() == x3.len() && x1.len() == bounds.len(),
        "genotype layouts differ"
    );
    (0..x1.len())
        .map(|k| {
            let v = if rng.gen::<f64>() < cr { x1[k] + f * (x2[k] - x3[k]) } else { x1[k] };
            bounds.clamp(k, v)
        })
        .collect()
}

/// Polynomial-mutation step `δ̄` for a uniform draw `u` and distribution index `eta`.
pub fn polynomial_delta(u: f64, eta: f64) -> f64 {
    let exponent = 1.0 / (eta + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(exponent) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(exponent)
    }
}

/// Each coordinate mutates with probability `pm` to `y_k + δ̄ · (upper_k − lower_k)`,
/// then is clamped.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    y: &mut [f64],
    pm: f64,
    eta: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> Result<(), MoeadError> {
    assert_eq!(y.len(), bounds.len(), "genotype and bounds lengths differ");
    for k in 0..y.len() {
        if rng.gen::<f64>() < pm {
            let span = bounds.upper[k] - bounds.lower[k];
            if !span.is_finite() {
                return Err(MoeadError::Config(format!("coordinate {k} is unbounded")));
            }
            let u = rng.gen::<f64>();
            y[k] = bounds.clamp(k, y[k] + polynomial_delta(u, eta) * span);
        }
    }
    Ok(())
}

/// Feasibility-first replacement rule.
pub fn should_replace(candidate: &Individual, incumbent: &Individual, lambda: &WeightVector, z: &[f64]) -> bool {
    match (candidate.is_feasible(), incumbent.is_feasible()) {
        (false, false) => candidate.violation < incumbent.violation,
        (true, false) => true,
        (false, true) => false,
        (true, true) => tchebycheff(&candidate.objectives, lambda, z) <= tchebycheff(&incumbent.objectives, lambda, z),
    }
}

/// Visits `pool` in random order and replaces incumbents the candidate beats,
/// stopping after `limit` replacements. Returns the number of replacements.
pub fn replace_neighbors<R: Rng + ?Sized>(
    subproblems: &mut [Subproblem],
    candidate: &Individual,
    pool: &[usize],
    limit: usize,
    z: &[f64],
    rng: &mut R,
) -> usize {
    let mut order = pool.to_vec();
    order.shuffle(rng);
    let mut replaced = 0;
    for k in order {
        if replaced >= limit {
            break;
        }
        let sp = &mut subproblems[k];
        if should_replace(candidate, &sp.incumbent, &sp.weight, z) {
            sp.incumbent = candidate.clone();
            replaced += 1;
        }
    }
    replaced
}

/// DRA tournament selection: the boundary (unit-weight) subproblems first,
/// then `count` winners of size-`tournament` tournaments on utility. Ties go
/// to the earliest-drawn contestant.
pub fn select_subproblems<R: Rng + ?Sized>(
    utilities: &[f64],
    boundary: &[usize],
    count: usize,
    tournament: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n = utilities.len();
    let mut selected = boundary.to_vec();
    for _ in 0..count {
        let mut best = rng.gen_range(0..n);
        for _ in 1..tournament {
            let c = rng.gen_range(0..n);
            if utilities[c] > utilities[best] {
                best = c;
            }
        }
        selected.push(best);
    }
    selected
}

/// DRA utility update from the relative decrease of a subproblem's
/// scalarized value since the previous update.
pub fn update_utility(utility: f64, previous: f64, current: f64) -> f64 {
    let improvement = if previous > 0.0 { ((previous - current) / previous).max(0.0) } else { 0.0 };
    if improvement > 0.001 {
        1.0
    } else {
        ((0.95 + 0.05 * improvement / 0.001) * utility).max(f64::MIN_POSITIVE)
    }
}
