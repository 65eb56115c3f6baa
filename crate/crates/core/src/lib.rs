//! Nonlinear ABS solvers for dense square systems `F(x) = 0`.
//!
//! Each major iteration sweeps the equations one at a time, re-evaluating
//! row `k` of the Jacobian and component `f_k` at the minor iterate built
//! from the first `k - 1` equations. Three parameter choices are provided:
//! Huang, modified Huang (each with an explicit packed `H` or a factored
//! `P, D` representation) and implicit LU with column pivoting.
//!
//! ```
//! use nlabs::{solve, Problem, SolverConfig, StopStatus, VariantSpec};
//!
//! let p = Problem::rosenbrock(2).unwrap();
//! let x0 = p.standard_start::<f64>();
//! let report = solve(&p, &x0, VariantSpec::MOD_HUANG1, &SolverConfig::default()).unwrap();
//! assert_eq!(report.status, StopStatus::Converged);
//! assert_eq!(report.total_iterations, 1);
//! ```

pub mod dense;
pub mod driver;
pub mod kernel;
pub mod problems;
mod scalar;

pub use dense::{
    inf_norm, mat_vec, vec_outer_apply, ColumnBuffer, DenseMatrix, DiagRecord, LinalgError,
    PackedSymMatrix, ProjectionMatrix, Vector,
};
pub use driver::{
    check_stopping, line_search_halving, solve, solve_in_precision, LineSearchOutcome, Precision,
    SolveError, SolveReport, SolverConfig, StopStatus, TraceEntry,
};
pub use kernel::{
    dependence_test, form_search_vector, major_iteration, select_pivot, KernelError,
    MajorOutcome, Method, MinorRecord, MinorState, Representation, RowOracle, SearchDirection,
    Sweep, SweepOptions, TolMode, VariantSpec,
};
pub use problems::{fd_jacobian_row, LinearSystem, Problem, ProblemError};
pub use scalar::Scalar;
