//! Config-driven runner: builds a problem from a TOML file, computes bounds,
//! runs the oracle and writes a canonical JSON report plus CSV tables.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod run;

pub use config::{Command, ProblemSpec, RunConfig, WeightSpec, SCHEMA_VERSION};
pub use error::{CliError, EXIT_CONFIG, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_VIOLATION};
pub use output::{from_json, to_json};
pub use report::{summary, Report, Violation, VIOLATION_TOL};
pub use run::{find_violations, run};

/// Exit code for a finished run.
pub fn exit_code(report: &Report) -> i32 {
    if report.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}
