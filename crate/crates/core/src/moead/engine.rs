use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{
    choose_mating_pool, de_crossover, pick_donors, polynomial_mutation, replace_neighbors, select_subproblems,
    tchebycheff, update_reference, update_utility,
};
use super::weights::{generate_weights, neighborhoods};
use super::{Archive, Individual, MoeadError, RunConfig, Subproblem, TOURNAMENT_SIZE};
use crate::encoding::Bounds;

/// Objective values and aggregate constraint violation of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub violation: f64,
}

/// A box-bounded, possibly constrained, multi-objective minimization problem.
pub trait Problem: Sync {
    type Error: std::error::Error + Send + Sync + 'static;

    fn n_objectives(&self) -> usize;

    fn bounds(&self) -> &Bounds;

    fn evaluate(&self, genotype: &[f64]) -> Result<Evaluation, Self::Error>;

    /// Oracle queries one evaluation costs.
    fn queries_per_evaluation(&self) -> u64 {
        1
    }

    /// `count` starting genotypes; the engine adds the all-zero genotype.
    /// Defaults to uniform sampling inside the bounds.
    fn initial_genotypes(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let b = self.bounds();
        (0..count)
            .map(|_| {
                (0..b.len())
                    .map(|k| if b.lower[k] < b.upper[k] { rng.gen_range(b.lower[k]..=b.upper[k]) } else { b.lower[k] })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub population: Vec<Individual>,
    pub archive: Vec<Individual>,
    pub reference: Vec<f64>,
    pub generations: usize,
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RngState {
    seed: [u8; 32],
    stream: u64,
    // u128 as a decimal string, JSON numbers top out at 64 bits in practice
    word_pos: String,
}

impl RngState {
    fn capture(rng: &ChaCha8Rng) -> Self {
        Self { seed: rng.get_seed(), stream: rng.get_stream(), word_pos: rng.get_word_pos().to_string() }
    }

    fn restore(&self) -> Result<ChaCha8Rng, MoeadError> {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        let pos: u128 = self
            .word_pos
            .parse()
            .map_err(|_| MoeadError::Checkpoint(format!("bad rng word position {:?}", self.word_pos)))?;
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

/// Serializable engine snapshot taken between generations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub generation: usize,
    pub queries: u64,
    pub subproblems: Vec<Subproblem>,
    pub reference: Vec<f64>,
    pub archive: Archive,
    rng: RngState,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String, MoeadError> {
        serde_json::to_string(self).map_err(|e| MoeadError::Checkpoint(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, MoeadError> {
        serde_json::from_str(s).map_err(|e| MoeadError::Checkpoint(e.to_string()))
    }
}

pub struct Engine<'p, P: Problem> {
    problem: &'p P,
    config: RunConfig,
    subproblems: Vec<Subproblem>,
    boundary: Vec<usize>,
    reference: Vec<f64>,
    archive: Archive,
    rng: ChaCha8Rng,
    generation: usize,
    queries: u64,
    mutation_rate: f64,
}

struct Offspring {
    pool: Vec<usize>,
    genotype: Vec<f64>,
}

fn evaluation_error<E: std::error::Error + Send + Sync + 'static>(e: E, checkpoint: Option<Checkpoint>) -> MoeadError {
    MoeadError::Evaluation { source: Box::new(e), checkpoint: checkpoint.map(Box::new) }
}

impl<'p, P: Problem> Engine<'p, P> {
    /// Builds subproblems, samples and evaluates the initial population
    /// (including the all-zero genotype) and sets the reference point.
    pub fn new(config: RunConfig, problem: &'p P) -> Result<Self, MoeadError> {
        let n_obj = problem.n_objectives();
        config.validate(n_obj)?;
        let bounds = problem.bounds();
        if bounds.is_empty() {
            return Err(MoeadError::Config("problem has no variables".into()));
        }
        if bounds.lower.iter().zip(&bounds.upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
            return Err(MoeadError::Config("every coordinate needs finite bounds with lower ≤ upper".into()));
        }
        let n = config.population_size;
        let weights = generate_weights(n_obj, n, config.seed)?;
        let neighbors = neighborhoods(&weights, config.neighborhood_size);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        // the zero genotype sits on the subproblem that weighs only the last objective
        let zero_slot = weights.iter().position(|w| w.unit_axis() == Some(n_obj - 1)).unwrap_or(n - 1);
        let mut random = problem.initial_genotypes(n - 1, &mut rng).into_iter();
        let zero: Vec<f64> = (0..bounds.len()).map(|k| bounds.clamp(k, 0.0)).collect();
        let genotypes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                if i == zero_slot {
                    zero.clone()
                } else {
                    let g = random.next().unwrap_or_else(|| zero.clone());
                    g.iter().enumerate().map(|(k, &v)| bounds.clamp(k, v)).collect()
                }
            })
            .collect();
        if genotypes.iter().any(|g| g.len() != bounds.len()) {
            return Err(MoeadError::Config("initializer produced a genotype of the wrong length".into()));
        }

        let evaluations: Vec<Evaluation> = genotypes
            .par_iter()
            .map(|g| problem.evaluate(g))
            .collect::<Result<_, _>>()
            .map_err(|e| evaluation_error(e, None))?;
        let mut reference = vec![f64::INFINITY; n_obj];
        let mut archive = Archive::new();
        let mut population = Vec::with_capacity(n);
        for (genotype, eval) in genotypes.into_iter().zip(evaluations) {
            let ind = to_individual(genotype, eval, n_obj)?;
            update_reference(&mut reference, &ind.objectives);
            archive.insert(&ind);
            population.push(ind);
        }
        let subproblems: Vec<Subproblem> = population
            .into_iter()
            .zip(weights)
            .zip(neighbors)
            .enumerate()
            .map(|(index, ((incumbent, weight), neighbors))| {
                let previous_value = tchebycheff(&incumbent.objectives, &weight, &reference);
                Subproblem { index, weight, neighbors, incumbent, utility: 1.0, previous_value }
            })
            .collect();
        let mutation_rate = config.mutation_rate.unwrap_or(1.0 / bounds.len() as f64);
        let boundary = boundary_indices(&subproblems, n_obj);
        Ok(Self {
            problem,
            queries: n as u64 * problem.queries_per_evaluation(),
            config,
            subproblems,
            boundary,
            reference,
            archive,
            rng,
            generation: 0,
            mutation_rate,
        })
    }

    pub fn resume(checkpoint: Checkpoint, problem: &'p P) -> Result<Self, MoeadError> {
        let n_obj = problem.n_objectives();
        checkpoint.config.validate(n_obj)?;
        let len = problem.bounds().len();
        if checkpoint.subproblems.len() != checkpoint.config.population_size
            || checkpoint.subproblems.iter().any(|s| s.incumbent.genotype.len() != len || s.incumbent.objectives.len() != n_obj)
            || checkpoint.reference.len() != n_obj
        {
            return Err(MoeadError::Checkpoint("snapshot does not match the problem".into()));
        }
        let rng = checkpoint.rng.restore()?;
        let mutation_rate = checkpoint.config.mutation_rate.unwrap_or(1.0 / len as f64);
        let boundary = boundary_indices(&checkpoint.subproblems, n_obj);
        Ok(Self {
            problem,
            config: checkpoint.config,
            subproblems: checkpoint.subproblems,
            boundary,
            reference: checkpoint.reference,
            archive: checkpoint.archive,
            rng,
            generation: checkpoint.generation,
            queries: checkpoint.queries,
            mutation_rate,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            generation: self.generation,
            queries: self.queries,
            subproblems: self.subproblems.clone(),
            reference: self.reference.clone(),
            archive: self.archive.clone(),
            rng: RngState::capture(&self.rng),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn subproblems(&self) -> &[Subproblem] {
        &self.subproblems
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn is_finished(&self) -> bool {
        self.generation >= self.config.generations || self.remaining_candidates() == Some(0)
    }

    fn remaining_candidates(&self) -> Option<usize> {
        let budget = self.config.evaluation_budget?;
        let per = self.problem.queries_per_evaluation().max(1);
        Some((budget.saturating_sub(self.queries) / per) as usize)
    }

    /// Runs one generation. Returns `Ok(false)` without doing anything once
    /// the generation limit or the evaluation budget is reached. On an
    /// evaluation failure the engine is left exactly as it was before the call.
    pub fn step(&mut self) -> Result<bool, MoeadError> {
        if self.is_finished() {
            return Ok(false);
        }
        let n_obj = self.problem.n_objectives();
        let n = self.subproblems.len();
        let rng_before = self.rng.clone();

        let utilities: Vec<f64> = self.subproblems.iter().map(|s| s.utility).collect();
        let picks = self.config.tournament_count(n_obj).unwrap_or(0);
        let mut selected = select_subproblems(&utilities, &self.boundary, picks, TOURNAMENT_SIZE, &mut self.rng);
        if let Some(limit) = self.remaining_candidates() {
            selected.truncate(limit);
        }

        let bounds = self.problem.bounds();
        let mut offspring = Vec::with_capacity(selected.len());
        for &i in &selected {
            let pool = choose_mating_pool(&self.subproblems[i].neighbors, n, self.config.delta, &mut self.rng);
            let (r2, r3) = pick_donors(&pool, i, n, &mut self.rng);
            let mut genotype = de_crossover(
                &self.subproblems[i].incumbent.genotype,
                &self.subproblems[r2].incumbent.genotype,
                &self.subproblems[r3].incumbent.genotype,
                self.config.crossover_rate,
                self.config.scale_factor,
                bounds,
                &mut self.rng,
            );
            polynomial_mutation(&mut genotype, self.mutation_rate, self.config.mutation_eta, bounds, &mut self.rng)?;
            offspring.push(Offspring { pool, genotype });
        }

        let problem = self.problem;
        let evaluated: Result<Vec<Evaluation>, P::Error> =
            offspring.par_iter().map(|o| problem.evaluate(&o.genotype)).collect();
        let evaluated = match evaluated {
            Ok(e) => e,
            Err(e) => {
                self.rng = rng_before;
                return Err(evaluation_error(e, Some(self.checkpoint())));
            }
        };

        let per = self.problem.queries_per_evaluation();
        for (child, eval) in offspring.into_iter().zip(evaluated) {
            let candidate = to_individual(child.genotype, eval, n_obj)?;
            self.queries += per;
            update_reference(&mut self.reference, &candidate.objectives);
            self.archive.insert(&candidate);
            replace_neighbors(
                &mut self.subproblems,
                &candidate,
                &child.pool,
                self.config.max_replacements,
                &self.reference,
                &mut self.rng,
            );
        }

        for sp in &mut self.subproblems {
            let current = tchebycheff(&sp.incumbent.objectives, &sp.weight, &self.reference);
            sp.utility = update_utility(sp.utility, sp.previous_value, current);
            sp.previous_value = current;
        }
        self.generation += 1;
        Ok(true)
    }

    pub fn run_to_end(&mut self) -> Result<(), MoeadError> {
        while self.step()? {}
        Ok(())
    }

    pub fn result(&self) -> RunResult {
        RunResult {
            population: self.subproblems.iter().map(|s| s.incumbent.clone()).collect(),
            archive: self.archive.members().to_vec(),
            reference: self.reference.clone(),
            generations: self.generation,
            queries: self.queries,
        }
    }
}

fn boundary_indices(subproblems: &[Subproblem], n_obj: usize) -> Vec<usize> {
    (0..n_obj)
        .filter_map(|axis| subproblems.iter().position(|s| s.weight.unit_axis() == Some(axis)))
        .collect()
}

fn to_individual(genotype: Vec<f64>, eval: Evaluation, n_obj: usize) -> Result<Individual, MoeadError> {
    if eval.objectives.len() != n_obj {
        return Err(MoeadError::Config(format!(
            "problem returned {} objectives, expected {n_obj}",
            eval.objectives.len()
        )));
    }
    if eval.objectives.iter().any(|f| !f.is_finite()) || !(eval.violation.is_finite() && eval.violation >= 0.0) {
        return Err(MoeadError::Config(format!(
            "problem returned non-finite objectives or a negative violation: {:?} / {}",
            eval.objectives, eval.violation
        )));
    }
    Ok(Individual { genotype, objectives: eval.objectives, violation: eval.violation })
}

/// Initializes, runs all generations and returns the final population and
/// the non-dominated feasible archive.
pub fn run<P: Problem>(config: RunConfig, problem: &P) -> Result<RunResult, MoeadError> {
    let mut engine = Engine::new(config, problem)?;
    engine.run_to_end()?;
    Ok(engine.result())
}
