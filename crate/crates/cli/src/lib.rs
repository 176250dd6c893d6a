//! Command-line front end: JSON configs and subcommands mapped onto the
//! `riskrobust` library.

mod cli;
pub mod config;
pub mod run;

pub use cli::{main_with, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
pub use config::{parse_config, parse_config_value, Command, ConfigError, ConfigErrors, ExperimentConfig, Format};
pub use run::{run, Outcome, RunOutput};
