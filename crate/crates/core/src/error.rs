use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed scheme {name}: {reason}")]
    Structural { name: String, reason: String },

    #[error("scheme {name} is inconsistent: sum(a) - 1 = {a_residual:.3e}, sum(b) - 1 = {b_residual:.3e}")]
    Inconsistent {
        name: String,
        a_residual: f64,
        b_residual: f64,
    },

    #[error("degenerate random draw: {0}")]
    DegenerateDraw(String),

    #[error("step-size grid unusable: {usable} points above the round-off plateau, need at least 3")]
    GridUnusable { usable: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("root finder did not converge after {iterations} sweeps (worst residual {worst_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        worst_residual: f64,
    },

    #[error("coefficients are not closed under complex conjugation: {0}")]
    NotConjugateClosed(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short kebab-case tag used for machine-readable error lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Structural { .. } => "structural",
            Error::Inconsistent { .. } => "inconsistent",
            Error::DegenerateDraw(_) => "degenerate-draw",
            Error::GridUnusable { .. } => "grid-unusable",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Range(_) => "range",
            Error::NonConvergence { .. } => "non-convergence",
            Error::NotConjugateClosed(_) => "not-conjugate-closed",
            Error::Capacity(_) => "capacity",
            Error::NotFound(_) => "not-found",
            Error::Invalid(_) => "invalid",
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
