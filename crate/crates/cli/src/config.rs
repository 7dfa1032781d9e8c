//! Attack configuration file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use aegen_core::encoding::{DctLayout, DirectChannels, DirectLayout, Layout};
use aegen_core::imaging::{read_image, Image};
use aegen_core::moead::RunConfig;
use aegen_core::oracle::{Oracle, RemoteConfig};
use aegen_core::scenarios::{
    default_groups, default_rotations, Constraint, InitGroup, Initializer, L1Scale, NormOrder, ScenarioKind,
    ScenarioProblem, ScenarioSpec,
};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable holding the default remote oracle endpoint.
pub const ORACLE_ENV: &str = "AEGEN_ORACLE_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub scenario: ScenarioBlock,
    pub encoding: EncodingBlock,
    pub optimizer: RunConfig,
    /// Defaults to the remote endpoint in `AEGEN_ORACLE_URL`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBlock>,
    pub io: IoBlock,
    #[serde(default)]
    pub init: InitBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub kind: ScenarioKind,
    /// Norm of the perturbation-amount objective (default `l2`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormOrder>,
    #[serde(default)]
    pub l1_scale: L1Scale,
    pub correct_labels: Vec<String>,
    /// Confidence threshold of the `l0_vs_l1` scenario (default 0.2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_acc: Option<f64>,
    /// Replaces the scenario's default constraints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<Constraint>>,
    /// Rotation angles in degrees for the `robust` scenario (default −60…60 step 15).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotations: Option<Vec<f64>>,
}

fn default_block() -> usize {
    1
}
fn default_bound() -> f64 {
    255.0
}
fn default_channels() -> DirectChannels {
    DirectChannels::All
}
fn default_dct() -> usize {
    8
}
fn default_coefficient_bound() -> f64 {
    30.0
}
fn default_true() -> bool {
    true
}
fn default_timeout() -> u64 {
    30_000
}
fn default_retries() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncodingBlock {
    Direct {
        #[serde(default = "default_block")]
        block_size: usize,
        /// Each variable lies in `[-bound, bound]` intensity levels.
        #[serde(default = "default_bound")]
        bound: f64,
        #[serde(default = "default_channels")]
        channels: DirectChannels,
    },
    Dct {
        n_patterns: usize,
        #[serde(default = "default_dct")]
        n_dct: usize,
        #[serde(default = "default_coefficient_bound")]
        coefficient_bound: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleBlock {
    Builtin {
        weights: PathBuf,
    },
    Remote {
        /// Falls back to `AEGEN_ORACLE_URL`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        endpoint: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_ms: u64,
        #[serde(default = "default_retries")]
        retries: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IoBlock {
    /// Clean input image (binary PPM/PGM).
    pub image: PathBuf,
    pub output_dir: PathBuf,
    /// Write `images/ae_<k>.ppm` and `images/rho_<k>.ppm`.
    #[serde(default = "default_true")]
    pub export_images: bool,
    /// Also write `checkpoint.json` every this many generations (0: only at the end).
    #[serde(default)]
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitBlock {
    #[default]
    Uniform,
    Stratified {
        /// Defaults to the eight-group sparse-to-dense table.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        groups: Option<Vec<InitGroup>>,
    },
}

impl AttackConfig {
    /// Reads a config file; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: AttackConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.io.image);
        fix(&mut self.io.output_dir);
        if let Some(OracleBlock::Builtin { weights }) = &mut self.oracle {
            fix(weights);
        }
    }

    /// Fills in every default so the stored config reproduces the run.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        let spec = self.scenario_spec()?;
        out.scenario.norm = Some(spec.norm);
        out.scenario.constraints = Some(spec.constraints);
        out.scenario.rotations = (spec.kind == ScenarioKind::Robust).then_some(spec.rotations);
        out.scenario.t_acc = None;
        if let InitBlock::Stratified { groups: None } = &out.init {
            out.init = InitBlock::Stratified { groups: Some(default_groups()) };
        }
        out.oracle = Some(self.oracle_block()?);
        Ok(out)
    }

    pub fn scenario_spec(&self) -> Result<ScenarioSpec, CliError> {
        let s = &self.scenario;
        let norm = s.norm.unwrap_or(NormOrder::L2);
        if s.t_acc.is_some() && s.kind != ScenarioKind::L0VsL1 {
            return Err(CliError::config("t_acc applies to the l0_vs_l1 scenario only"));
        }
        if s.rotations.is_some() && s.kind != ScenarioKind::Robust {
            return Err(CliError::config("rotations apply to the robust scenario only"));
        }
        let mut spec = match s.kind {
            ScenarioKind::AccuracyVsAmount => ScenarioSpec::accuracy_vs_amount(s.correct_labels.clone(), norm),
            ScenarioKind::L0VsL1 => {
                let mut spec = ScenarioSpec::l0_vs_l1(s.correct_labels.clone(), s.t_acc.unwrap_or(0.2));
                spec.norm = s.norm.unwrap_or(NormOrder::L1);
                spec
            }
            ScenarioKind::Robust => ScenarioSpec::robust(s.correct_labels.clone(), norm),
        };
        spec.l1_scale = s.l1_scale;
        if let Some(c) = &s.constraints {
            spec.constraints = c.clone();
        }
        if let Some(r) = &s.rotations {
            spec.rotations = r.clone();
        }
        if spec.kind == ScenarioKind::Robust && spec.rotations.is_empty() {
            spec.rotations = default_rotations();
        }
        spec.validate().map_err(CliError::config)?;
        Ok(spec)
    }

    pub fn layout(&self, dims: (usize, usize, usize)) -> Result<Layout, CliError> {
        let (w, h, c) = dims;
        let layout = match &self.encoding {
            &EncodingBlock::Direct { block_size, bound, channels } => {
                if !(bound.is_finite() && bound > 0.0) {
                    return Err(CliError::config(format!("direct bound must be positive, got {bound}")));
                }
                let mut l = DirectLayout::new(w, h, c, block_size, bound);
                l.mode = channels;
                Layout::Direct(l)
            }
            &EncodingBlock::Dct { n_patterns, n_dct, coefficient_bound } => {
                let mut l = DctLayout::new(w, h, c, n_patterns);
                l.n_dct = n_dct;
                l.coefficient_bound = coefficient_bound;
                Layout::Dct(l)
            }
        };
        layout.validate().map_err(CliError::config)?;
        Ok(layout)
    }

    pub fn initializer(&self) -> Initializer {
        match &self.init {
            InitBlock::Uniform => Initializer::Uniform,
            InitBlock::Stratified { groups } => {
                Initializer::Stratified { groups: groups.clone().unwrap_or_else(default_groups) }
            }
        }
    }

    pub fn oracle_block(&self) -> Result<OracleBlock, CliError> {
        match &self.oracle {
            Some(OracleBlock::Remote { endpoint: None, timeout_ms, retries }) => Ok(OracleBlock::Remote {
                endpoint: Some(env_endpoint()?),
                timeout_ms: *timeout_ms,
                retries: *retries,
            }),
            Some(block) => Ok(block.clone()),
            None => Ok(OracleBlock::Remote {
                endpoint: Some(env_endpoint()?),
                timeout_ms: default_timeout(),
                retries: default_retries(),
            }),
        }
    }

    /// Checks everything that can be checked without contacting the oracle.
    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario_spec()?;
        let n_obj = self.scenario.kind.n_objectives();
        self.optimizer.validate(n_obj).map_err(CliError::config)?;
        if !self.io.image.is_file() {
            return Err(CliError::config(format!("input image {} does not exist", self.io.image.display())));
        }
        if let OracleBlock::Builtin { weights } = self.oracle_block()? {
            if !weights.is_file() {
                return Err(CliError::config(format!("weight file {} does not exist", weights.display())));
            }
        }
        if matches!(self.init, InitBlock::Stratified { .. }) && !matches!(self.encoding, EncodingBlock::Direct { .. }) {
            return Err(CliError::config("stratified init requires the direct encoding"));
        }
        Ok(())
    }

    pub fn load_image(&self) -> Result<Image, CliError> {
        read_image(&self.io.image).map_err(|e| CliError::config(format!("{}: {e}", self.io.image.display())))
    }

    /// Validates, loads the image, connects the oracle and builds the problem.
    pub fn build_problem(&self) -> Result<ScenarioProblem, CliError> {
        self.validate()?;
        let clean = self.load_image()?;
        let oracle = Arc::new(open_oracle(&self.oracle_block()?)?);
        let layout = self.layout(clean.dims())?;
        let problem = ScenarioProblem::new(self.scenario_spec()?, layout, clean, oracle)
            .and_then(|p| p.with_initializer(self.initializer()))
            .map_err(CliError::config)?;
        problem.check_population(self.optimizer.population_size).map_err(CliError::config)?;
        Ok(problem)
    }
}

fn env_endpoint() -> Result<String, CliError> {
    std::env::var(ORACLE_ENV)
        .ok()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::config(format!("no oracle configured and {ORACLE_ENV} is not set")))
}

/// Opens an oracle with caching on. Load failures of a weight file are
/// configuration errors; failing to reach a remote endpoint is an oracle error.
pub fn open_oracle(block: &OracleBlock) -> Result<Oracle, CliError> {
    match block {
        OracleBlock::Builtin { weights } => Oracle::load_builtin(weights)
            .map(Oracle::with_cache)
            .map_err(|e| CliError::config(format!("{}: {e}", weights.display()))),
        OracleBlock::Remote { endpoint, timeout_ms, retries } => {
            let endpoint = match endpoint {
                Some(e) => e.clone(),
                None => env_endpoint()?,
            };
            let config = RemoteConfig { endpoint, timeout_ms: *timeout_ms, retries: *retries };
            Oracle::connect_remote(config).map(Oracle::with_cache).map_err(CliError::oracle)
        }
    }
}

pub fn schema() -> schemars::Schema {
    schemars::schema_for!(AttackConfig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "scenario": {"kind": "l0_vs_l1", "correct_labels": ["frog"]},
            "encoding": {"kind": "direct"},
            "optimizer": {"population_size": 100, "generations": 10},
            "oracle": {"kind": "builtin", "weights": "net.aemlp"},
            "io": {"image": "img.ppm", "output_dir": "out"},
            "init": {"kind": "stratified"}
        }"#
    }

    #[test]
    fn defaults_resolve() {
        let mut cfg: AttackConfig = serde_json::from_str(minimal()).unwrap();
        cfg.resolve_paths(Path::new("/base"));
        assert_eq!(cfg.io.image, PathBuf::from("/base/img.ppm"));
        let spec = cfg.scenario_spec().unwrap();
        assert_eq!(spec.constraints.len(), 1);
        assert_eq!(spec.constraints[0].threshold, 0.2);
        let resolved = cfg.resolved().unwrap();
        assert!(matches!(resolved.init, InitBlock::Stratified { groups: Some(ref g) } if g.len() == 8));
        let layout = cfg.layout((32, 32, 3)).unwrap();
        assert_eq!(layout.len(), 3072);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = minimal().replace("\"correct_labels\"", "\"labels\": [], \"correct_labels\"");
        assert!(serde_json::from_str::<AttackConfig>(&bad).is_err());
        let bad = minimal().replace("\"generations\": 10", "\"generations\": 10, \"gens\": 3");
        assert!(serde_json::from_str::<AttackConfig>(&bad).is_err());
    }

    #[test]
    fn scenario_options_must_fit_the_kind() {
        let mut cfg: AttackConfig = serde_json::from_str(minimal()).unwrap();
        cfg.scenario.rotations = Some(vec![0.0]);
        assert!(cfg.scenario_spec().is_err());
        cfg.scenario.rotations = None;
        cfg.scenario.kind = ScenarioKind::Robust;
        cfg.scenario.t_acc = Some(0.1);
        assert!(cfg.scenario_spec().is_err());
        cfg.scenario.t_acc = None;
        assert_eq!(cfg.scenario_spec().unwrap().rotations.len(), 9);
    }

    #[test]
    fn dct_length_for_large_images() {
        let mut cfg: AttackConfig = serde_json::from_str(minimal()).unwrap();
        cfg.encoding = EncodingBlock::Dct { n_patterns: 10, n_dct: 8, coefficient_bound: 30.0 };
        assert_eq!(cfg.layout((224, 224, 3)).unwrap().len(), 1424);
    }

    #[test]
    fn schema_lists_blocks() {
        let text = serde_json::to_string(&schema()).unwrap();
        for key in ["scenario", "encoding", "optimizer", "oracle", "io", "init", "population_size"] {
            assert!(text.contains(key), "{key}");
        }
    }
}
