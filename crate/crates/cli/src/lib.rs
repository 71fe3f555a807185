//! Command line front end for `lcv-bandit`: configuration parsing, experiment
//! dispatch and CSV/manifest writers.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

pub use config::{parse_config, parse_config_str, ConfigError, ConfigFile, LoadedConfig};
