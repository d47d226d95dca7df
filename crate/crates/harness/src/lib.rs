//! Experiment orchestration for the willingness solvers: sweep a parameter,
//! run several solvers over seeded repetitions and collect a CSV table.

pub mod error;
pub mod experiment;
pub mod report;

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, summarize, to_csv_string, write_csv, Axis, ExperimentSpec, GraphSource, ResultRow, Summary};
pub use report::SolveOutput;
