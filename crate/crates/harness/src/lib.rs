//! Scenario-driven verification of the first-variation identity and its
//! companion checks.
//!
//! A scenario names f, g and the bodies from the [`catalog`], the checks to
//! run and their tolerances. [`run_suite`] evaluates a set of scenarios and
//! returns one [`Report`] per scenario, ordered by identifier.

pub mod catalog;
pub mod checks;
pub mod io;
pub mod report;
pub mod scenario;

pub use catalog::{BodySpec, FunctionSpec};
pub use report::{load_report, run_scenario, run_suite, tally, CheckRecord, Report, SCHEMA_VERSION};
pub use scenario::{load_scenario, scenario_paths, CheckName, Resolved, Scenario, ScenarioError, Tolerances};
