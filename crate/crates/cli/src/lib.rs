//! Command-line front end: ensemble files, reports, and the subcommands.

pub mod commands;
pub mod format;
pub mod report;
