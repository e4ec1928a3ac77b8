//! Experiment driver for the `daas` command-line tool.
//!
//! Each command turns an [`ExperimentConfig`] into headerless CSV rows, with
//! run metadata carried on `#`-prefixed manifest lines. Output is a pure
//! function of the config.

pub mod commands;
pub mod config;

pub use commands::{
    convergence, cost, refinement, sample, Command, ConvergenceRow, CostRow, RefinementRow,
};
pub use config::{ExperimentConfig, Method};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<daas_core::Error> for CliError {
    fn from(e: daas_core::Error) -> Self {
        use daas_core::Error as E;
        match e {
            E::InvalidPmf(_) | E::OutsideDomain(_) | E::EmptySamples => {
                Self::Numerical(e.to_string())
            }
            _ => Self::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
