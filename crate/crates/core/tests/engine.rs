use std::sync::atomic::{AtomicUsize, Ordering};

use aegen_core::encoding::Bounds;
use aegen_core::moead::{dominates, run, Checkpoint, Engine, Evaluation, MoeadError, Problem, RunConfig};

#[derive(Debug, thiserror::Error)]
#[error("evaluation refused")]
struct Refused;

/// f1 = mean(x), f2 = 1 − mean(x) on [0,1]^10. Every point is Pareto-optimal.
struct MeanProblem {
    bounds: Bounds,
    calls: AtomicUsize,
    fail_after: Option<usize>,
}

impl MeanProblem {
    fn new() -> Self {
        Self { bounds: Bounds::uniform(10, 0.0, 1.0), calls: AtomicUsize::new(0), fail_after: None }
    }

    fn failing_after(calls: usize) -> Self {
        Self { fail_after: Some(calls), ..Self::new() }
    }
}

impl Problem for MeanProblem {
    type Error = Refused;

    fn n_objectives(&self) -> usize {
        2
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, Refused> {
        let calls = self.calls.fetch_add(1, Ordering::SeqCst);
        if self.fail_after.is_some_and(|limit| calls >= limit) {
            return Err(Refused);
        }
        let m = x.iter().sum::<f64>() / x.len() as f64;
        Ok(Evaluation { objectives: vec![m, 1.0 - m], violation: 0.0 })
    }
}

/// Minimize (x0, x1) subject to x0 + x1 ≥ 1, with violation 1 − x0 − x1.
struct Constrained {
    bounds: Bounds,
}

impl Problem for Constrained {
    type Error = Refused;

    fn n_objectives(&self) -> usize {
        2
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, Refused> {
        Ok(Evaluation { objectives: vec![x[0], x[1]], violation: (1.0 - x[0] - x[1]).max(0.0) })
    }
}

fn config() -> RunConfig {
    RunConfig::new(50, 100, 2024)
}

#[test]
fn zero_generations_archive_initial_population() {
    let problem = MeanProblem::new();
    let result = run(RunConfig::new(30, 0, 9), &problem).unwrap();
    assert_eq!(result.generations, 0);
    assert_eq!(result.queries, 30);
    assert_eq!(result.population.len(), 30);
    assert!(result.population.iter().any(|i| i.genotype.iter().all(|&v| v == 0.0)));
    for ind in &result.population {
        // every point is optimal, so all distinct objective vectors survive
        assert!(result.archive.iter().any(|a| a.objectives == ind.objectives));
    }
}

#[test]
fn bi_objective_front_is_exact_and_wide() {
    let result = run(config(), &MeanProblem::new()).unwrap();
    assert!(!result.archive.is_empty());
    for a in &result.archive {
        assert!((a.objectives[0] + a.objectives[1] - 1.0).abs() < 1e-9);
    }
    let (lo, hi) = result
        .archive
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a.objectives[0]), hi.max(a.objectives[0])));
    assert!(hi - lo >= 0.8, "spread {lo}..{hi}");
}

#[test]
fn archive_is_mutually_non_dominated_and_reference_is_below() {
    let problem = Constrained { bounds: Bounds::uniform(4, 0.0, 1.0) };
    let result = run(RunConfig::new(40, 60, 5), &problem).unwrap();
    for a in &result.archive {
        assert!(a.is_feasible());
        for b in &result.archive {
            assert!(!dominates(&a.objectives, &b.objectives));
        }
    }
    for ind in result.population.iter().chain(&result.archive) {
        assert!(result.reference.iter().zip(&ind.objectives).all(|(z, f)| z <= f));
    }
}

#[test]
fn utilities_stay_in_unit_interval() {
    let problem = MeanProblem::new();
    let mut engine = Engine::new(config(), &problem).unwrap();
    let mut last_reference = engine.reference().to_vec();
    for _ in 0..30 {
        engine.step().unwrap();
        for s in engine.subproblems() {
            assert!(s.utility > 0.0 && s.utility <= 1.0);
            assert_eq!(s.neighbors[0], s.index);
        }
        assert!(engine.reference().iter().zip(&last_reference).all(|(now, before)| now <= before));
        last_reference = engine.reference().to_vec();
    }
    assert_eq!(engine.queries(), 50 + 30 * 10);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let a = run(config(), &MeanProblem::new()).unwrap();
    let b = run(config(), &MeanProblem::new()).unwrap();
    let bits = |r: &aegen_core::moead::RunResult| -> Vec<u64> {
        r.archive.iter().flat_map(|i| i.genotype.iter().chain(&i.objectives)).map(|v| v.to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.population, b.population);
    let c = run(RunConfig::new(50, 100, 2025), &MeanProblem::new()).unwrap();
    assert_ne!(a.population, c.population);
}

#[test]
fn checkpoint_resume_is_bit_exact() {
    let problem = MeanProblem::new();
    let uninterrupted = run(config(), &problem).unwrap();

    let mut first = Engine::new(config(), &problem).unwrap();
    for _ in 0..37 {
        first.step().unwrap();
    }
    let json = first.checkpoint().to_json().unwrap();
    let restored = Checkpoint::from_json(&json).unwrap();
    assert_eq!(restored, first.checkpoint());
    let mut resumed = Engine::resume(restored, &problem).unwrap();
    resumed.run_to_end().unwrap();
    let result = resumed.result();
    assert_eq!(result.population, uninterrupted.population);
    assert_eq!(result.archive, uninterrupted.archive);
    assert_eq!(result.queries, uninterrupted.queries);
}

#[test]
fn budget_stops_early_and_truncates() {
    let mut cfg = config();
    cfg.evaluation_budget = Some(50 + 10 * 4 + 3);
    let result = run(cfg, &MeanProblem::new()).unwrap();
    assert_eq!(result.queries, 93);
    assert_eq!(result.generations, 5);
}

#[test]
fn failure_returns_resumable_checkpoint() {
    let reference = run(config(), &MeanProblem::new()).unwrap();
    let failing = MeanProblem::failing_after(50 + 10 * 12 + 4);
    let mut engine = Engine::new(config(), &failing).unwrap();
    let err = engine.run_to_end().unwrap_err();
    let checkpoint = match err {
        MoeadError::Evaluation { checkpoint: Some(cp), .. } => *cp,
        other => panic!("unexpected error {other:?}"),
    };
    assert_eq!(checkpoint.generation, 12);
    assert_eq!(engine.generation(), 12);

    let healthy = MeanProblem::new();
    let mut resumed = Engine::resume(checkpoint, &healthy).unwrap();
    resumed.run_to_end().unwrap();
    assert_eq!(resumed.result().population, reference.population);
}

#[test]
fn configuration_errors() {
    let problem = MeanProblem::new();
    assert!(matches!(run(RunConfig::new(12, 5, 0), &problem), Err(MoeadError::Config(_))));
    let mut cfg = config();
    cfg.neighborhood_size = 60;
    assert!(matches!(run(cfg, &problem), Err(MoeadError::Config(_))));
    let mut cfg = config();
    cfg.delta = 1.5;
    assert!(matches!(run(cfg, &problem), Err(MoeadError::Config(_))));
    // generations 0 needs no tournament
    assert!(run(RunConfig::new(12, 0, 0), &problem).is_ok());
}

#[test]
fn config_json_defaults_and_unknown_keys() {
    let cfg: RunConfig = serde_json::from_str(r#"{"population_size": 100, "generations": 200, "seed": 7}"#).unwrap();
    assert_eq!(cfg, RunConfig::new(100, 200, 7));
    assert!(serde_json::from_str::<RunConfig>(r#"{"population_size": 1, "generations": 1, "sede": 7}"#).is_err());
}
