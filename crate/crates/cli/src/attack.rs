//! `aegen attack`: run an optimization and export the front.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aegen_core::imaging::write_image;
use aegen_core::moead::{Checkpoint, Engine, Individual};
use aegen_core::moead::Problem;
use aegen_core::scenarios::ScenarioProblem;
use serde::Serialize;

use crate::config::AttackConfig;
use crate::{plot, CliError};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub output_dir: PathBuf,
    /// Rows written to `front.csv`.
    pub rows: usize,
    /// Feasible rows (the archive size).
    pub feasible: usize,
    pub generations: usize,
    /// Queries charged against the budget (candidates × transformations).
    pub nominal_queries: u64,
}

#[derive(Serialize)]
struct OracleSummary<'a> {
    model_id: &'a str,
    queries: u64,
    cache_hits: u64,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    config: &'a AttackConfig,
    seed: u64,
    genotype_length: usize,
    objectives: &'a [&'a str],
    generations_completed: usize,
    nominal_queries: u64,
    oracle: OracleSummary<'a>,
    archive_size: usize,
    resumed_from_generation: Option<usize>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct IndividualRecord<'a> {
    index: usize,
    objectives: &'a [f64],
    violation: f64,
    feasible: bool,
    genotype_file: String,
    confidences: Vec<f64>,
    top_label: String,
    top_confidence: f64,
    genotype: &'a [f64],
}

pub fn attack(config_path: &Path, resume: bool) -> Result<AttackOutcome, CliError> {
    let config = AttackConfig::load(config_path)?;
    attack_with(&config, resume)
}

pub fn attack_with(config: &AttackConfig, resume: bool) -> Result<AttackOutcome, CliError> {
    let started = Instant::now();
    let resolved = config.resolved()?;
    let problem = config.build_problem()?;
    let out = &config.io.output_dir;
    fs::create_dir_all(out)?;
    let checkpoint_path = out.join(CHECKPOINT_FILE);

    let (mut engine, resumed_from) = if resume {
        let text = fs::read_to_string(&checkpoint_path)
            .map_err(|e| CliError::config(format!("cannot resume from {}: {e}", checkpoint_path.display())))?;
        let mut checkpoint = Checkpoint::from_json(&text).map_err(CliError::config)?;
        let mut expected = config.optimizer.clone();
        expected.generations = checkpoint.config.generations;
        expected.evaluation_budget = checkpoint.config.evaluation_budget;
        if expected != checkpoint.config {
            return Err(CliError::config("optimizer settings differ from the checkpoint; only generations and the budget may change"));
        }
        checkpoint.config.generations = config.optimizer.generations;
        checkpoint.config.evaluation_budget = config.optimizer.evaluation_budget;
        let from = checkpoint.generation;
        (Engine::resume(checkpoint, &problem).map_err(CliError::from_engine)?, Some(from))
    } else {
        (Engine::new(config.optimizer.clone(), &problem).map_err(CliError::from_engine)?, None)
    };

    loop {
        match engine.step() {
            Ok(true) => {
                let every = config.io.checkpoint_every;
                if every > 0 && engine.generation() % every == 0 {
                    write_checkpoint(&checkpoint_path, &engine.checkpoint())?;
                }
            }
            Ok(false) => break,
            Err(e) => {
                if let aegen_core::moead::MoeadError::Evaluation { checkpoint: Some(cp), .. } = &e {
                    write_checkpoint(&checkpoint_path, cp)?;
                }
                return Err(CliError::from_engine(e));
            }
        }
    }
    write_checkpoint(&checkpoint_path, &engine.checkpoint())?;
    let stats = problem.oracle().stats();
    let result = engine.result();

    let rows = front_rows(&result.archive, &result.population);
    let feasible = rows.iter().filter(|r| r.is_feasible()).count();
    export(config, &problem, &rows)?;

    let record = RunRecord {
        config: &resolved,
        seed: config.optimizer.seed,
        genotype_length: problem.bounds().len(),
        objectives: problem.spec().kind.objective_names(),
        generations_completed: result.generations,
        nominal_queries: result.queries,
        oracle: OracleSummary { model_id: &problem.oracle().info().model_id, queries: stats.queries, cache_hits: stats.cache_hits },
        archive_size: result.archive.len(),
        resumed_from_generation: resumed_from,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    fs::write(out.join("run.json"), serde_json::to_string_pretty(&record).map_err(CliError::runtime)?)?;

    Ok(AttackOutcome {
        output_dir: out.clone(),
        rows: rows.len(),
        feasible,
        generations: result.generations,
        nominal_queries: result.queries,
    })
}

fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), CliError> {
    let json = checkpoint.to_json().map_err(CliError::runtime)?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, json)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// The archive sorted by objectives, or, when nothing feasible was found,
/// the least-violating population member (flagged infeasible).
fn front_rows(archive: &[Individual], population: &[Individual]) -> Vec<Individual> {
    let mut rows = archive.to_vec();
    if rows.is_empty() {
        if let Some(best) = population.iter().min_by(|a, b| a.violation.total_cmp(&b.violation)) {
            rows.push(best.clone());
        }
    }
    rows.sort_by(|a, b| {
        a.objectives
            .iter()
            .zip(&b.objectives)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

fn export(config: &AttackConfig, problem: &ScenarioProblem, rows: &[Individual]) -> Result<(), CliError> {
    let out = &config.io.output_dir;
    let genotypes = out.join("genotypes");
    let images = out.join("images");
    for dir in [&genotypes, &images] {
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
    }
    fs::create_dir_all(&genotypes)?;
    if config.io.export_images {
        fs::create_dir_all(&images)?;
    }

    let names = problem.spec().kind.objective_names();
    let mut csv = format!("index,{},violation,feasible,genotype\n", names.join(","));
    let mut jsonl = String::new();
    for (k, ind) in rows.iter().enumerate() {
        let genotype_file = format!("genotypes/g_{k}.csv");
        let objectives: Vec<String> = ind.objectives.iter().map(|v| v.to_string()).collect();
        writeln!(csv, "{k},{},{},{},{genotype_file}", objectives.join(","), ind.violation, ind.is_feasible()).ok();
        let flat: Vec<String> = ind.genotype.iter().map(|v| v.to_string()).collect();
        fs::write(out.join(&genotype_file), flat.join(",") + "\n")?;

        let assessment = problem.assess(&ind.genotype).map_err(CliError::runtime)?;
        let (rho, perturbed) = problem.render(&ind.genotype).map_err(CliError::runtime)?;
        let top = problem.oracle().classify(&perturbed)?;
        let top = top.top1();
        let record = IndividualRecord {
            index: k,
            objectives: &ind.objectives,
            violation: ind.violation,
            feasible: ind.is_feasible(),
            genotype_file,
            confidences: assessment.confidences,
            top_label: top.label.clone(),
            top_confidence: top.confidence,
            genotype: &ind.genotype,
        };
        jsonl.push_str(&serde_json::to_string(&record).map_err(CliError::runtime)?);
        jsonl.push('\n');
        if config.io.export_images {
            write_image(&perturbed, images.join(format!("ae_{k}.ppm"))).map_err(CliError::runtime)?;
            write_image(&rho.visualize(), images.join(format!("rho_{k}.ppm"))).map_err(CliError::runtime)?;
        }
    }
    fs::write(out.join("front.csv"), &csv)?;
    fs::write(out.join("individuals.jsonl"), jsonl)?;
    let table = plot::FrontTable::parse(&csv).map_err(CliError::runtime)?;
    fs::write(out.join("front.svg"), plot::render_svg(&table))?;
    Ok(())
}
