//! Command line and HTTP front ends for the `pbs` workbench.
//!
//! Both front ends accept the same [`ScenarioConfig`] documents and go through
//! [`api`], so a scenario produces the same numbers whichever way it is run.

pub mod api;
pub mod cli;
pub mod config;
pub mod server;

pub use api::{ApiResult, Operation};
pub use config::{FieldError, ScenarioConfig};
