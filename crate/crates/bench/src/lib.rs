//! Experiment runner for the `nlabs` solvers.
//!
//! Runs the problem x dimension x start x method grid, renders the results
//! as a markdown or csv table, and checks them against the reference
//! fixtures in `fixtures/`.

use thiserror::Error;

pub mod experiment;
pub mod newton;
pub mod reference;
pub mod table;

pub use experiment::{
    parse_variant, reference_grid, run_matrix, scale_label, variant_cli_name, ExperimentSpec, ResultRow, METHODS,
};
pub use newton::{gaussian_solve, newton_reference_solve, NewtonError};
pub use reference::{
    compare_reference, ComparisonEntry, ComparisonReport, IterSpec, ReferenceEntry, ReferenceFixture, ReferenceKey,
    ResidualBound, StatusMatch, DEFAULT_ITER_TOLERANCE,
};
pub use table::{emit_table, format_residual, parse_csv, TableFormat, CSV_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error(transparent)]
    Problem(#[from] nlabs::ProblemError),
    #[error(transparent)]
    Solve(#[from] nlabs::SolveError),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
}
