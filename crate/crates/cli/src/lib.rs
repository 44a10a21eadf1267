//! Library side of the `skcomm` binary: subcommands, verification suites and
//! report formatting.

pub mod commands;
pub mod report;
pub mod suites;

pub use report::RunReport;
pub use suites::Suite;
