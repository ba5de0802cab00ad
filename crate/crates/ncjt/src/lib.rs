//! File formats, the parallel simulation driver and the command-line front
//! end for the `ncjt-core` analysis.

pub mod commands;
pub mod output;
pub mod presets;
pub mod runner;
pub mod scenario_file;

pub use ncjt_core as core;
