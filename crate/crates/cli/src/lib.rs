//! Command implementations behind the `boxcast` binary.

pub mod commands;
pub mod config;
pub mod exit;
pub mod report;
