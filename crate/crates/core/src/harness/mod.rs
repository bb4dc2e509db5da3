//! Scenario files, Monte-Carlo runs, CSV output, complexity tables and the
//! oracle validation suite.

mod complexity;
mod scenario;
mod simulate;
pub mod validate;

pub use complexity::{complexity, format_table, ComplexityCase, ComplexityRow};
pub use scenario::{ScenarioFile, Sweep, SweepParam, PRESETS};
pub use simulate::{mean_rates, run_trial_timed, simulate, write_csv, ResultRow, CSV_HEADER};
pub use validate::{run_validation, CheckResult, ValidationReport, DEFAULT_SEED};
