pub mod config;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{run_experiment, Outcome};

/// Failure categories, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) | Failure::Io(_) => 3,
        }
    }
}

impl From<robin_core::Error> for Failure {
    fn from(e: robin_core::Error) -> Self {
        match e {
            robin_core::Error::Config(m) => Failure::Config(m),
            e @ robin_core::Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            robin_core::Error::Io(e) => Failure::Io(e),
            robin_core::Error::Csv(e) => Failure::Io(std::io::Error::other(e)),
            other => Failure::Solver(other.to_string()),
        }
    }
}

pub const EXIT_VIOLATION: u8 = 4;
