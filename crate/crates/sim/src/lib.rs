//! Std companion of `hsr-handover`: JSON configuration, CSV artifacts,
//! parallel Monte Carlo and the `hsr-sim` command-line tool.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use error::{Result, SimError};
