//! Command-line front end for `kinkscan`: strict run configs, dataset I/O,
//! and the `kernel`, `simulate`, `estimate` and `mc` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
