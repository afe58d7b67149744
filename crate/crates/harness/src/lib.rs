//! Command-line harness around `hhw-core`: scenario and sweep configuration,
//! CSV/JSON/SVG artifacts, and the `hhw` subcommands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod report;
pub mod svg;

pub use config::{ScenarioConfig, SweepConfig};
pub use error::{HarnessError, Result};
