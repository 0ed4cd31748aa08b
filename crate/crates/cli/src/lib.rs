//! Configuration, output and subcommands of the `srdem` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use config::{parse_config, SimConfig};
pub use output::{write_snapshot, Number, SNAPSHOT_HEADER};
