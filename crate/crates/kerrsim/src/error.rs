use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage, named in numerical failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Prepare,
    Gate,
    Sample,
    Bin,
    Reconstruct,
    Compare,
    Signature,
    Klm,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Prepare => "prepare",
            Stage::Gate => "gate",
            Stage::Sample => "sample",
            Stage::Bin => "bin",
            Stage::Reconstruct => "reconstruct",
            Stage::Compare => "compare",
            Stage::Signature => "signature",
            Stage::Klm => "klm",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("stage {stage} (alpha = {alpha:?}): {source}")]
    Numerical {
        stage: Stage,
        alpha: Option<f64>,
        #[source]
        source: kerrsim_core::Error,
    },
    #[error("stage signature (alpha = {alpha}): {detail}")]
    Signature { alpha: f64, detail: String },
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Format { .. } => 2,
            Error::Io { .. } => 2,
            Error::Numerical { .. } | Error::Signature { .. } => 3,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Numerical { stage, .. } => Some(*stage),
            Error::Signature { .. } => Some(Stage::Signature),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attaches a stage (and α) to core errors.
pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage, alpha: Option<f64>) -> Result<T>;
}

impl<T> AtStage<T> for kerrsim_core::Result<T> {
    fn at(self, stage: Stage, alpha: Option<f64>) -> Result<T> {
        self.map_err(|source| Error::Numerical { stage, alpha, source })
    }
}
