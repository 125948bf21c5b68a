//! Command-line front end for `padyn-core`.
//!
//! [`run`] parses arguments, runs one analysis and returns the exit code:
//! 0 on success (a violated criterion is a result, not a failure), 2 on a
//! configuration error, 3 when an enumeration budget or the precision runs out.

mod app;
pub mod cli;
pub mod report;

pub use app::{analyze, execute, run, Failure, LoadedMap, EXIT_BUDGET, EXIT_CONFIG};
