//! Command-line front end for `hyperperc`: argument parsing, command
//! dispatch, JSON/CSV rendering, run manifests and the acceptance suite
//! behind `verify`.

pub mod args;
pub mod criteria;
pub mod error;
pub mod manifest;
pub mod output;
pub mod run;

pub use error::CliError;
