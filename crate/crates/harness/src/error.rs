use std::path::PathBuf;

use hhw_core::analysis::AnalysisError;
use hhw_core::integrators::IntegrationError;
use hhw_core::model::ModelError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFICATION_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const HYPOTHESIS: u8 = 3;
    pub const RUNTIME: u8 = 4;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("integration failed: {0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => exit::CONFIG,
            HarnessError::Hypothesis(_) => exit::HYPOTHESIS,
            HarnessError::Runtime(_) | HarnessError::Io { .. } => exit::RUNTIME,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ModelError> for HarnessError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Hypothesis { .. } => HarnessError::Hypothesis(e.to_string()),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<IntegrationError> for HarnessError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::Model(m) => m.into(),
            IntegrationError::InvalidSpec(s) => HarnessError::Config(format!("integrator: {s}")),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<AnalysisError> for HarnessError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(m) => m.into(),
            AnalysisError::Integration(i) => i.into(),
            AnalysisError::Domain(s) => HarnessError::Config(s),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
