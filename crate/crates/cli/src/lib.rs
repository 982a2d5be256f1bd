//! Front end for the `nugrass` checks: expression syntax, bundle files and
//! the subcommands behind the binary.

pub mod bundle_file;
pub mod commands;
pub mod expr;

pub use bundle_file::BundleFile;
pub use commands::{run_suite, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
pub use expr::{parse_expression, parse_with};
