//! Command-line surface of the `lpgraph` toolkit: dataset, checkpoint and
//! metrics files, SVG reports, and one function per subcommand so the
//! commands can also be driven from tests.

pub mod checkpoint;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod files;
pub mod metrics;
pub mod report;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult};
