//! Command-line front end: model files, verification suites and report output.

pub mod cli;
pub mod model;
pub mod report;
pub mod suites;
