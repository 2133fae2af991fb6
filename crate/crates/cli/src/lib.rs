//! Scenario files, commands and JSON reports for the `commonfix` binary.
//!
//! Exit codes: 0 ok, 1 hypothesis failed, 2 solve or certification failed,
//! 3 input error, 4 inconclusive.

pub mod commands;
pub mod report;
pub mod scenario;

pub use commands::{run, Command, Options};
pub use report::{Report, Status, SCHEMA_VERSION};
pub use scenario::{load_scenario, parse_scenario, Problem, Scenario, ScenarioError};
