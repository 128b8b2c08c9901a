//! Command-line front end: configuration, dataset loading, Gram matrices,
//! training, prediction and scoring.

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod eval;
pub mod synth;

pub use cli::{main_with_args, Cli};
