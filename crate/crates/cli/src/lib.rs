//! Configuration, file formats and subcommands of the `fracpass` binary.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use commands::{cmd_check, cmd_constants, cmd_residual, cmd_solve, CheckOutcome, SolveSummary};
pub use config::RunConfig;
pub use error::{CliError, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NON_CONVERGENCE, EXIT_OK};
