//! Library backing the `fpa-bench` binary: experiment configs, the cell
//! runner, CSV persistence, report rendering, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod report;
pub mod runner;
