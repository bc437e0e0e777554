//! Experiment runner for `cqed-core`: device files, CSV tables, SVG plots
//! and the `cqed` command line.

pub mod config;
pub mod error;
pub mod experiments;
pub mod runner;
pub mod svg;
pub mod table;

pub use error::CliError;
