use std::path::PathBuf;

use thiserror::Error;

use crate::inner::SubproblemDiagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not agree (a caller contract violation).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Non-finite values, out-of-range parameters or invalid options.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A factorization that should exist for valid inputs failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("ADMM did not converge after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e})")]
    AdmmNotConverged {
        iterations: usize,
        primal: f64,
        dual: f64,
    },

    #[error("convex subproblem not solved: KKT residual {:.3e} above tolerance {:.3e}", .diagnostics.kkt_residual, .tolerance)]
    SubproblemNotConverged {
        diagnostics: Box<SubproblemDiagnostics>,
        tolerance: f64,
    },

    #[error("could not place blocks {lengths:?} in {n} positions after {attempts} attempts")]
    Placement {
        lengths: Vec<usize>,
        n: usize,
        attempts: usize,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_finite<'a>(
    what: &str,
    values: impl IntoIterator<Item = &'a f64>,
) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} contains non-finite entries"
        )))
    }
}
