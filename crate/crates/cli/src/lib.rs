//! Configuration, result tables and subcommands behind the `slipt` binary.

pub mod commands;
pub mod config;
pub mod table;
