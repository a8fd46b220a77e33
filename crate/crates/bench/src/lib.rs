//! Experiment harness for the planners in `drrt-core`: experiment
//! configuration, suite execution, per-run records, summaries and the plan
//! CSV format used by the `drrt` binary.

mod config;
mod error;
mod plan_csv;
mod record;
mod seed;
mod suite;
mod summary;

pub use config::{Algorithm, ExperimentSpec, Suite};
pub use error::{BenchError, Result};
pub use plan_csv::{read_plan, write_plan};
pub use record::{read_records, write_records, RunRecord};
pub use seed::{cell_seed, mix};
pub use suite::{instances, run_algorithm, run_suite, run_suite_with_threads, Instance, Outcome};
pub use summary::{aggregate, write_summary, SummaryRow};
