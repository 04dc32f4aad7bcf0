//! Command-line driver around the `mixnl` library: configuration loading,
//! operator presets, pipeline orchestration, and artifact emission.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod presets;

pub use config::{ConfigError, RunConfig};
pub use pipeline::{assemble, branch_for, init_threads, run, Branch, RunReport, Stage};
pub use presets::{preset, PresetParams};
