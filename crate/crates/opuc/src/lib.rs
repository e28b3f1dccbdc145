//! Std companion to `opuc-core`: configuration, experiment runs, output
//! formats and the `opuc` command line.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod parallel;
pub mod presets;

pub use opuc_core as core;
