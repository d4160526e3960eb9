//! Scenario files, verification suites and report output for covham-core.

pub mod report;
pub mod runner;
pub mod scenario;
pub mod tolerances;

pub use report::{Record, Report, Status};
pub use runner::{run_verification, Suite};
pub use scenario::{load_scenario, parse_scenario, OutputFormat, Scenario, ScenarioError};
pub use tolerances::Tolerances;
