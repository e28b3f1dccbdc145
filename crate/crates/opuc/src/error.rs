use std::fmt;

use thiserror::Error;

/// A suite result that contradicts a proven or pinned invariant, with
/// enough coordinates to rerun it in isolation.
#[derive(Clone, Debug, PartialEq)]
pub struct Falsification {
    pub suite: &'static str,
    pub invariant: String,
    pub seed: u64,
    pub trajectory: u64,
    pub degree: u64,
}

impl fmt::Display for Falsification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} suite: {} (seed {}, trajectory {}, degree {})",
            self.suite, self.invariant, self.seed, self.trajectory, self.degree
        )
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invariant falsified: {0}")]
    Falsified(Falsification),
    #[error("numerical failure: {0}")]
    Numeric(opuc_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Falsified(_) => 1,
            RunError::Config(_) => 2,
            RunError::Budget(_) => 3,
            RunError::Numeric(_) | RunError::Io(_) | RunError::Csv(_) | RunError::Json(_) => 4,
        }
    }
}

impl From<opuc_core::Error> for RunError {
    fn from(e: opuc_core::Error) -> Self {
        use opuc_core::Error as E;
        match e {
            E::BudgetExceeded { .. } => RunError::Budget(e.to_string()),
            E::InvalidEnvelope(_)
            | E::InvalidRandomizer(_)
            | E::InvalidArgument(_)
            | E::GridTooSmall { .. }
            | E::NotPowerOfTwo(_)
            | E::Overflow(_) => RunError::Config(e.to_string()),
            other => RunError::Numeric(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
