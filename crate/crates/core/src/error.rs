use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates an operation's precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed (factorization breakdown, non-convergence).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// SMO could not reach the KKT tolerance within its iteration budget.
    #[error("SVM solver did not converge after {iterations} iterations (KKT gap {gap:.3e} > tol {tol:.1e})")]
    Convergence { iterations: usize, gap: f64, tol: f64 },

    /// The training loss became non-finite. `last_good` holds the last
    /// accepted parameter vector and `last_loss` its loss.
    #[error("training diverged at iteration {iteration} (last good loss {last_loss})")]
    Divergence {
        iteration: usize,
        last_loss: f64,
        last_good: Vec<f64>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Attaches a pipeline stage name to an error.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
