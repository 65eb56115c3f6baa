//! Major-iteration loop: stopping criteria, interval-halving line search,
//! best-point tracking and the per-iteration trace.

use thiserror::Error;

use crate::dense::{LinalgError, Vector};
use crate::kernel::{major_iteration, KernelError, RowOracle, SweepOptions, TolMode, VariantSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    Bits32,
    #[default]
    Bits64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Dependence tolerance for `delta_k`.
    pub t: f64,
    /// Residual tolerance on `||F(x)||_inf`.
    pub eps: f64,
    /// Relative step tolerance.
    pub tol: f64,
    /// Stagnation window: stop when the best residual has not improved for
    /// this many iterations.
    pub n_s: usize,
    pub itmax: usize,
    pub n_half: usize,
    pub line_search: bool,
    pub tol_mode: TolMode,
    pub precision: Precision,
    /// Divergence window: stop when the residual grew this many times in a row.
    pub n_div: usize,
}

impl SolverConfig {
    pub fn double_precision() -> Self {
        Self {
            t: 1e-15,
            eps: 1e-15,
            tol: 1e-18,
            n_s: 5,
            itmax: 100,
            n_half: 20,
            line_search: false,
            tol_mode: TolMode::Absolute,
            precision: Precision::Bits64,
            n_div: 5,
        }
    }

    pub fn single_precision() -> Self {
        Self {
            t: 1e-6,
            eps: 1e-6,
            tol: 1e-10,
            precision: Precision::Bits32,
            ..Self::double_precision()
        }
    }

    pub fn for_precision(precision: Precision) -> Self {
        match precision {
            Precision::Bits32 => Self::single_precision(),
            Precision::Bits64 => Self::double_precision(),
        }
    }

    pub fn with_line_search(mut self, on: bool) -> Self {
        self.line_search = on;
        self
    }

    /// `itmax` may be zero (no major iterations); every other count must be
    /// at least one and every tolerance positive.
    pub fn validate(&self) -> Result<(), SolveError> {
        for (name, v) in [("t", self.t), ("eps", self.eps), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolveError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("n_s", self.n_s), ("n_half", self.n_half), ("n_div", self.n_div)] {
            if v == 0 {
                return Err(SolveError::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::double_precision()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopStatus {
    Converged,
    SmallStep,
    Oscillation,
    Divergence,
    MaxIter,
    NumericBreakdown,
}

impl StopStatus {
    /// Table flag: `""`, `(x)`, `(o)`, `(div)`, `(max)`, `(nan)`.
    pub fn flag(&self) -> &'static str {
        match self {
            Self::Converged => "",
            Self::SmallStep => "(x)",
            Self::Oscillation => "(o)",
            Self::Divergence => "(div)",
            Self::MaxIter => "(max)",
            Self::NumericBreakdown => "(nan)",
        }
    }

    pub fn from_flag(flag: &str) -> Option<Self> {
        Some(match flag {
            "" => Self::Converged,
            "(x)" => Self::SmallStep,
            "(o)" => Self::Oscillation,
            "(div)" => Self::Divergence,
            "(max)" => Self::MaxIter,
            "(nan)" => Self::NumericBreakdown,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<T> {
    pub iteration: usize,
    pub residual_inf: T,
    /// `||x_i - x_{i-1}||_inf`; zero for the starting point.
    pub step_inf: T,
    /// `||x_i||_inf`, kept for the relative step test of the next iteration.
    pub x_inf: T,
    pub halvings_used: usize,
    /// Line search ran out of halvings without decreasing the residual.
    pub halvings_exhausted: bool,
    pub skipped_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub status: StopStatus,
    pub best_residual: T,
    pub best_iteration: usize,
    pub total_iterations: usize,
    pub final_x: Vector<T>,
    pub trace: Vec<TraceEntry<T>>,
    /// Components evaluated inside major iterations and at line-search trial points.
    pub total_component_evals: usize,
    pub total_jacobian_element_evals: usize,
    /// Components evaluated to measure `||F||` at `x_0` and at every major iterate.
    pub residual_component_evals: usize,
}

impl<T: Scalar> SolveReport<T> {
    pub fn to_f64(&self) -> SolveReport<f64> {
        let c = |v: T| v.to_f64_lossy();
        SolveReport {
            status: self.status,
            best_residual: c(self.best_residual),
            best_iteration: self.best_iteration,
            total_iterations: self.total_iterations,
            final_x: Vector::new(self.final_x.to_f64_vec()).expect("nonempty"),
            trace: self
                .trace
                .iter()
                .map(|e| TraceEntry {
                    iteration: e.iteration,
                    residual_inf: c(e.residual_inf),
                    step_inf: c(e.step_inf),
                    x_inf: c(e.x_inf),
                    halvings_used: e.halvings_used,
                    halvings_exhausted: e.halvings_exhausted,
                    skipped_rows: e.skipped_rows,
                })
                .collect(),
            total_component_evals: self.total_component_evals,
            total_jacobian_element_evals: self.total_jacobian_element_evals,
            residual_component_evals: self.residual_component_evals,
        }
    }

    pub fn line_search_exhaustions(&self) -> usize {
        self.trace.iter().filter(|e| e.halvings_exhausted).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Index of the first minimal residual in `trace`, ignoring NaNs.
fn best_index<T: Scalar>(trace: &[TraceEntry<T>]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, e) in trace.iter().enumerate() {
        let r = e.residual_inf;
        if r.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if r >= b => {}
            _ => best = Some((i, r)),
        }
    }
    best.map(|(i, _)| i)
}

/// Stopping test on the trace so far, in priority order
/// residual, small step, stagnation, divergence, iteration budget.
pub fn check_stopping<T: Scalar>(
    trace: &[TraceEntry<T>],
    config: &SolverConfig,
) -> Option<StopStatus> {
    let last = trace.last()?;
    let i = trace.len() - 1;
    if last.residual_inf <= T::lit(config.eps) {
        return Some(StopStatus::Converged);
    }
    if i >= 1 {
        let prev_norm = trace[i - 1].x_inf;
        let bound = if prev_norm == T::zero() {
            T::lit(config.tol)
        } else {
            T::lit(config.tol) * prev_norm
        };
        if last.step_inf <= bound {
            return Some(StopStatus::SmallStep);
        }
    }
    if let Some(b) = best_index(trace) {
        if i - b >= config.n_s {
            return Some(StopStatus::Oscillation);
        }
    }
    if !config.line_search
        && i >= config.n_div
        && trace[i - config.n_div..=i].windows(2).all(|w| w[1].residual_inf > w[0].residual_inf)
    {
        return Some(StopStatus::Divergence);
    }
    if i >= config.itmax {
        return Some(StopStatus::MaxIter);
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome<T> {
    pub x: Vector<T>,
    pub residual: T,
    pub halvings: usize,
    /// Component evaluations spent on trial points.
    pub evals: usize,
    pub exhausted: bool,
}

/// Halves the interval between `x_prev` and the trial point until the
/// residual drops strictly below `prev_norm`. If `n_half` halvings do not
/// get there, the trial point with the smallest residual (the original
/// `x_new` included) is returned and `exhausted` is set.
pub fn line_search_halving<T: Scalar, O: RowOracle<T> + ?Sized>(
    oracle: &O,
    x_prev: &Vector<T>,
    x_new: &Vector<T>,
    new_norm: T,
    prev_norm: T,
    n_half: usize,
) -> Result<LineSearchOutcome<T>, LinalgError> {
    if new_norm < prev_norm {
        return Ok(LineSearchOutcome {
            x: x_new.clone(),
            residual: new_norm,
            halvings: 0,
            evals: 0,
            exhausted: false,
        });
    }
    let n = oracle.dimension();
    let mut best = (x_new.clone(), new_norm);
    let mut trial = x_new.clone();
    let mut evals = 0;
    for h in 1..=n_half {
        trial = x_prev.midpoint(&trial)?;
        let r = oracle.residual(&trial).inf_norm();
        evals += n;
        if r < prev_norm {
            return Ok(LineSearchOutcome { x: trial, residual: r, halvings: h, evals, exhausted: false });
        }
        if r < best.1 || best.1.is_nan() {
            best = (trial.clone(), r);
        }
    }
    Ok(LineSearchOutcome { x: best.0, residual: best.1, halvings: n_half, evals, exhausted: true })
}

/// Runs major iterations from `x0` until a stopping criterion fires.
///
/// The starting point is trace entry 0, so a start that already satisfies
/// `eps` stops with zero major iterations.
pub fn solve<T: Scalar, O: RowOracle<T> + ?Sized>(
    oracle: &O,
    x0: &Vector<T>,
    variant: VariantSpec,
    config: &SolverConfig,
) -> Result<SolveReport<T>, SolveError> {
    config.validate()?;
    let n = oracle.dimension();
    if x0.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: x0.len() }.into());
    }
    let options = SweepOptions { t: T::lit(config.t), tol_mode: config.tol_mode, freeze: false };

    let mut component_evals = 0;
    let mut jacobian_evals = 0;
    let mut residual_evals = n;
    let r0 = oracle.residual(x0).inf_norm();
    let mut trace = vec![TraceEntry {
        iteration: 0,
        residual_inf: r0,
        step_inf: T::zero(),
        x_inf: x0.inf_norm(),
        halvings_used: 0,
        halvings_exhausted: false,
        skipped_rows: 0,
    }];
    let mut x = x0.clone();
    let mut status = if r0.is_nan() {
        Some(StopStatus::NumericBreakdown)
    } else {
        check_stopping(&trace, config)
    };

    while status.is_none() {
        let outcome = match major_iteration(oracle, &x, variant, options) {
            Ok(o) => o,
            Err(KernelError::NumericBreakdown { .. }) => {
                status = Some(StopStatus::NumericBreakdown);
                break;
            }
            Err(e) => return Err(e.into()),
        };
        component_evals += outcome.component_evals;
        jacobian_evals += outcome.jacobian_element_evals;

        let r_new = oracle.residual(&outcome.x_next).inf_norm();
        residual_evals += n;
        if r_new.is_nan() {
            status = Some(StopStatus::NumericBreakdown);
            break;
        }
        let prev_norm = trace.last().expect("trace starts non-empty").residual_inf;
        let accepted = if config.line_search && r_new >= prev_norm {
            let ls =
                line_search_halving(oracle, &x, &outcome.x_next, r_new, prev_norm, config.n_half)?;
            component_evals += ls.evals;
            ls
        } else {
            LineSearchOutcome {
                x: outcome.x_next,
                residual: r_new,
                halvings: 0,
                evals: 0,
                exhausted: false,
            }
        };
        let step = accepted.x.sub(&x)?.inf_norm();
        trace.push(TraceEntry {
            iteration: trace.len(),
            residual_inf: accepted.residual,
            step_inf: step,
            x_inf: accepted.x.inf_norm(),
            halvings_used: accepted.halvings,
            halvings_exhausted: accepted.exhausted,
            skipped_rows: outcome.skipped_rows.len(),
        });
        x = accepted.x;
        status = if accepted.residual.is_finite() {
            check_stopping(&trace, config)
        } else {
            Some(StopStatus::NumericBreakdown)
        };
    }

    let best = best_index(&trace).unwrap_or(0);
    Ok(SolveReport {
        status: status.expect("loop exits with a status"),
        best_residual: trace[best].residual_inf,
        best_iteration: best,
        total_iterations: trace.len() - 1,
        final_x: x,
        trace,
        total_component_evals: component_evals,
        total_jacobian_element_evals: jacobian_evals,
        residual_component_evals: residual_evals,
    })
}

/// Solves in the precision named by `config.precision`, reporting in `f64`.
pub fn solve_in_precision<O>(
    oracle: &O,
    x0: &Vector<f64>,
    variant: VariantSpec,
    config: &SolverConfig,
) -> Result<SolveReport<f64>, SolveError>
where
    O: RowOracle<f32> + RowOracle<f64> + ?Sized,
{
    match config.precision {
        Precision::Bits64 => solve::<f64, O>(oracle, x0, variant, config),
        Precision::Bits32 => {
            let x0: Vector<f32> = Vector::from_f64(x0.as_slice())?;
            solve::<f32, O>(oracle, &x0, variant, config).map(|r| r.to_f64())
        }
    }
}
