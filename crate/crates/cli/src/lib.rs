//! The `tripint` command line: problem files, subcommands, and CSV/SVG
//! output.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod problem_file;

pub use args::{Cli, Command};
pub use commands::run;
pub use error::CliError;
pub use problem_file::{ProblemFile, RunOptions};
