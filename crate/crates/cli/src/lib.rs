//! Configuration-driven experiment runner for the `ultralab` library.

pub mod config;
mod error;
pub mod report;
pub mod run;

pub use config::{Experiment, RunConfig};
pub use error::CliError;
pub use report::RunReport;
pub use run::{run, RunOptions};
