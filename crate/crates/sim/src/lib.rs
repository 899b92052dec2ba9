//! File formats, sweeps, the stochastic oracle and the `nms-sim` command
//! line built on `nms-core`.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod oracle;
pub mod sweep;

pub use error::{Result, SimError};
