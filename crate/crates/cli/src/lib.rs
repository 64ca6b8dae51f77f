//! Configuration-driven experiment runner for the `rough-laplace` numerics.
//!
//! A run reads one JSON configuration, resolves defaults, validates it,
//! and writes deterministic artifacts under `<out>/<kind>-<hash>/`.

pub mod config;
pub mod run;
pub mod schema;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, ResolvedConfig};
pub use run::{run, run_dir_name};
