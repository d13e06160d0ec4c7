//! Command-line front end, experiment reports and the acceptance suite.

pub mod commands;
pub mod report;
pub mod suite;
