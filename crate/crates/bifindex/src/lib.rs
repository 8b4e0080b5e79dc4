//! Command-line driver, TOML problem files and JSON reports on top of
//! `bifindex-core`.

pub mod app;
pub mod config;
pub mod exec;
pub mod expr;
pub mod report;

pub use app::{main_with_args, run, Cli, Command, GlobalOptions, Outcome};
