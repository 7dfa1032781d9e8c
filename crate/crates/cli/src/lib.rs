//! Command implementations behind the `aegen` binary.

pub mod attack;
pub mod config;
pub mod eval;
pub mod plot;

use std::fmt;

use aegen_core::moead::MoeadError;
use aegen_core::oracle::OracleError;
use aegen_core::scenarios::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid or inconsistent configuration (exit 2).
    Config,
    /// The classifier could not be reached or misbehaved (exit 3).
    Oracle,
    /// Anything else (exit 1).
    Runtime,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn config(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Config, error: anyhow::anyhow!("{e}") }
    }

    pub fn oracle(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Oracle, error: anyhow::anyhow!("{e}") }
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Runtime, error: anyhow::anyhow!("{e}") }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Oracle => 3,
            ErrorKind::Runtime => 1,
        }
    }

    /// Sorts an optimizer failure into configuration, oracle or runtime.
    pub fn from_engine(e: MoeadError) -> Self {
        match &e {
            MoeadError::Config(_) => Self::config(e),
            MoeadError::Checkpoint(_) => Self::runtime(e),
            MoeadError::Evaluation { source, .. } => match source.downcast_ref::<ScenarioError>() {
                Some(ScenarioError::Oracle(_)) => Self::oracle(e),
                Some(ScenarioError::Config(_)) => Self::config(e),
                _ => Self::runtime(e),
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e)
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::DimensionMismatch { .. } => Self::config(e),
            _ => Self::oracle(e),
        }
    }
}
