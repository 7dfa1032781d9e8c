//! Constrained MOEA/D with DRA-style subproblem selection.
//!
//! The multi-objective problem is decomposed into one Tchebycheff
//! subproblem per weight vector. Each generation processes the boundary
//! (unit-weight) subproblems plus a utility tournament pick, creates one DE +
//! polynomial-mutation offspring per processed subproblem, evaluates the
//! offspring (concurrently), and then applies reference-point updates and
//! feasibility-first neighborhood replacement sequentially in selection order.

mod archive;
mod engine;
mod operators;
mod weights;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{dominates, Archive};
pub use engine::{run, Checkpoint, Engine, Evaluation, Problem, RunResult};
pub use operators::{
    choose_mating_pool, de_crossover, pick_donors, polynomial_delta, polynomial_mutation, replace_neighbors,
    select_subproblems, should_replace, tchebycheff, update_reference, update_utility,
};
pub use weights::{generate_weights, neighborhoods, WeightVector};

pub const TOURNAMENT_SIZE: usize = 10;

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum MoeadError {
    #[error("configuration error: {0}")]
    Config(String),
    /// The problem failed to evaluate a candidate. When the failure happened
    /// inside the generation loop, `checkpoint` holds the engine state at the
    /// start of that generation.
    #[error("evaluation failed: {source}")]
    Evaluation { source: BoxError, checkpoint: Option<Box<Checkpoint>> },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: Vec<f64>,
    pub objectives: Vec<f64>,
    /// Aggregate constraint violation; 0 exactly when feasible.
    pub violation: f64,
}

impl Individual {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subproblem {
    pub index: usize,
    pub weight: WeightVector,
    /// Nearest subproblems by weight distance, starting with `index` itself.
    pub neighbors: Vec<usize>,
    pub incumbent: Individual,
    pub utility: f64,
    /// Scalarized value of the incumbent at the last utility update.
    pub previous_value: f64,
}

fn default_neighborhood() -> usize {
    10
}
fn default_delta() -> f64 {
    0.8
}
fn default_replacements() -> usize {
    1
}
fn default_cr() -> f64 {
    0.9
}
fn default_f() -> f64 {
    0.5
}
fn default_eta() -> f64 {
    20.0
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of subproblems `N_D` (= population size).
    pub population_size: usize,
    /// Generations `N_g`; 0 evaluates the initial population only.
    pub generations: usize,
    #[serde(default = "default_neighborhood")]
    pub neighborhood_size: usize,
    /// Probability of mating and replacing within the neighborhood.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Maximum replacements per offspring (`n_r`).
    #[serde(default = "default_replacements")]
    pub max_replacements: usize,
    #[serde(default = "default_cr")]
    pub crossover_rate: f64,
    #[serde(default = "default_f")]
    pub scale_factor: f64,
    /// Per-coordinate mutation probability; `None` means `1 / genotype length`.
    #[serde(default)]
    pub mutation_rate: Option<f64>,
    #[serde(default = "default_eta")]
    pub mutation_eta: f64,
    #[serde(default)]
    pub seed: u64,
    /// Maximum oracle queries, counting one per candidate per transformation.
    #[serde(default)]
    pub evaluation_budget: Option<u64>,
}

impl RunConfig {
    pub fn new(population_size: usize, generations: usize, seed: u64) -> Self {
        Self {
            population_size,
            generations,
            neighborhood_size: default_neighborhood(),
            delta: default_delta(),
            max_replacements: default_replacements(),
            crossover_rate: default_cr(),
            scale_factor: default_f(),
            mutation_rate: None,
            mutation_eta: default_eta(),
            seed,
            evaluation_budget: None,
        }
    }

    pub fn validate(&self, n_objectives: usize) -> Result<(), MoeadError> {
        let fail = |m: String| Err(MoeadError::Config(m));
        if self.population_size == 0 {
            return fail("population size must be positive".into());
        }
        if self.neighborhood_size < 3 || self.neighborhood_size > self.population_size {
            return fail(format!(
                "neighborhood size {} must lie in 3..={}",
                self.neighborhood_size, self.population_size
            ));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return fail(format!("delta {} outside [0, 1]", self.delta));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return fail(format!("crossover rate {} outside [0, 1]", self.crossover_rate));
        }
        if let Some(pm) = self.mutation_rate {
            if !(0.0..=1.0).contains(&pm) {
                return fail(format!("mutation rate {pm} outside [0, 1]"));
            }
        }
        if !(self.mutation_eta > 0.0 && self.mutation_eta.is_finite()) {
            return fail(format!("mutation index {} must be positive", self.mutation_eta));
        }
        if !self.scale_factor.is_finite() {
            return fail("scale factor must be finite".into());
        }
        if self.max_replacements == 0 {
            return fail("max_replacements must be at least 1".into());
        }
        if self.population_size < n_objectives {
            return fail(format!(
                "population of {} cannot hold {n_objectives} boundary subproblems",
                self.population_size
            ));
        }
        if self.generations > 0 && self.tournament_count(n_objectives).is_none() {
            return fail(format!(
                "population {} too small: floor(N_D/5) - N_f must be at least 1 with {n_objectives} objectives",
                self.population_size
            ));
        }
        Ok(())
    }

    /// `floor(N_D / 5) − N_f`, the number of tournament picks per generation.
    pub fn tournament_count(&self, n_objectives: usize) -> Option<usize> {
        (self.population_size / 5).checked_sub(n_objectives).filter(|&c| c >= 1)
    }
}
