use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate triangle {cell}: area {area:e} below threshold {threshold:e}")]
    DegenerateTriangle { cell: usize, area: f64, threshold: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("shooting bracket exhausted; last bracket [{lo}, {hi}]")]
    BracketExhausted { lo: f64, hi: f64 },

    #[error("radial profile went negative at r = {r}")]
    NegativeProfile { r: f64 },

    #[error("radial profile rejected: {0}")]
    InvalidProfile(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("no convergence after {iterations} iterations: {detail}")]
    NoConvergence { iterations: usize, detail: String },

    #[error("asymmetry center search did not converge; best value found {best}")]
    AsymmetrySearch { best: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
