//! Command-line laboratory around `front-core`: config files, run
//! orchestration, and the CSV/JSON artifact formats.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::{Overrides, RunConfig};
pub use error::{LabError, Result};
