//! Library surface of the `clawharness` binary: argument definitions,
//! configuration resolution, and the subcommand implementations. Split
//! from `main` so integration tests can inspect the parser.

pub mod args;
pub mod commands;
pub mod config;
