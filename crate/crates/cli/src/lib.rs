//! Library side of the `qwalk` command-line tool: run configuration, CSV I/O,
//! the simulation driver and the small query commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod simulate;
pub mod table;

pub use config::{Engine, Output, RunConfig};
pub use error::{CliError, Result};
pub use simulate::{simulate, simulate_all, ResultRecord};
