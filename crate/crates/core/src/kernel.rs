//! One major iteration of the nonlinear ABS method.
//!
//! A major iteration starts from `y_1 = x` with `H_1 = I` and sweeps the
//! equations `k = 1..n`. Minor step `k` evaluates the `k`-th Jacobian row
//! `a_k` and component `f_k` at the current minor iterate `y_k`, builds a
//! search vector `p_k` and denominator `delta_k` according to the variant,
//! and moves to `y_{k+1} = y_k - f_k(y_k) / delta_k * p_k`. The projection
//! `H` (or its factored form `I - P D^{-1} P^T`) is then updated so that it
//! annihilates every row processed so far.
//!
//! Indices in this module are zero-based: row `k` here is equation `k + 1`.

use thiserror::Error;

use crate::dense::{
    vec_outer_apply, ColumnBuffer, DenseMatrix, DiagRecord, LinalgError, PackedSymMatrix,
    ProjectionMatrix, Vector,
};
use crate::scalar::Scalar;

/// A residual system `F: R^n -> R^n` exposed one equation at a time.
///
/// Both methods must be pure. `jacobian_row` returns the length-`n`
/// gradient of component `k`.
pub trait RowOracle<T: Scalar> {
    fn dimension(&self) -> usize;
    fn component_value(&self, k: usize, y: &Vector<T>) -> T;
    fn jacobian_row(&self, k: usize, y: &Vector<T>) -> Vector<T>;

    /// Full `F(y)`, assembled from `component_value`.
    fn residual(&self, y: &Vector<T>) -> Vector<T> {
        let f = (0..self.dimension()).map(|k| self.component_value(k, y)).collect();
        Vector::new(f).expect("oracle dimension is at least 1")
    }
}

impl<T: Scalar, O: RowOracle<T> + ?Sized> RowOracle<T> for &O {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn component_value(&self, k: usize, y: &Vector<T>) -> T {
        (**self).component_value(k, y)
    }
    fn jacobian_row(&self, k: usize, y: &Vector<T>) -> Vector<T> {
        (**self).jacobian_row(k, y)
    }
}

/// Choice of the ABS parameter `z_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// `z_k = a_k`, `delta_k = p_k^T a_k`.
    Huang,
    /// `z_k = H_k^T a_k`, `delta_k = p_k^T p_k`.
    ModifiedHuang,
    /// `z_k = e_j` with `j` the column pivot.
    ImplicitLu,
}

/// How the projection is held between minor steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// `H_k` in packed symmetric storage (`n^2/2` scalars).
    ExplicitH,
    /// `H_k = I - P D^{-1} P^T`, with `P` an `n x n` column buffer.
    FactoredPd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariantSpec {
    pub method: Method,
    /// Ignored for [`Method::ImplicitLu`], which always keeps a dense `H`.
    pub representation: Representation,
}

impl VariantSpec {
    pub const HUANG1: Self = Self::new(Method::Huang, Representation::ExplicitH);
    pub const MOD_HUANG1: Self = Self::new(Method::ModifiedHuang, Representation::ExplicitH);
    pub const HUANG2: Self = Self::new(Method::Huang, Representation::FactoredPd);
    pub const MOD_HUANG2: Self = Self::new(Method::ModifiedHuang, Representation::FactoredPd);
    pub const IMPLICIT_LU: Self = Self::new(Method::ImplicitLu, Representation::ExplicitH);

    pub const fn new(method: Method, representation: Representation) -> Self {
        Self { method, representation }
    }

    /// Short routine label: `huang1`, `mod.huang1`, `huang2`, `mod.huang2`, `implicit lu`.
    pub fn label(&self) -> &'static str {
        match (self.method, self.representation) {
            (Method::ImplicitLu, _) => "implicit lu",
            (Method::Huang, Representation::ExplicitH) => "huang1",
            (Method::Huang, Representation::FactoredPd) => "huang2",
            (Method::ModifiedHuang, Representation::ExplicitH) => "mod.huang1",
            (Method::ModifiedHuang, Representation::FactoredPd) => "mod.huang2",
        }
    }
}

/// How the dependence tolerance `t` is applied to `delta_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TolMode {
    /// `|delta| <= t`
    #[default]
    Absolute,
    /// `|delta| <= t * ||a_k||_inf`
    RowScaled,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("non-finite value produced at minor step {minor}")]
    NumericBreakdown { minor: usize },
    #[error("no admissible pivot column left at minor step {minor}")]
    NoAdmissiblePivot { minor: usize },
    #[error("dependence tolerance must be positive, got {0:e}")]
    InvalidTolerance(f64),
}

/// True when row `k` must be treated as linearly dependent on the
/// rows already processed.
pub fn dependence_test<T: Scalar>(delta: T, a_norm: T, mode: TolMode, t: T) -> bool {
    let bound = match mode {
        TolMode::Absolute => t,
        TolMode::RowScaled => t * a_norm,
    };
    delta.abs() <= bound
}

/// Index of the largest `|w_j|` over columns not yet used in this sweep.
/// Ties go to the smallest index. `None` when every column is used.
pub fn select_pivot<T: Scalar>(w: &Vector<T>, used: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (j, &wj) in w.iter().enumerate() {
        if used.get(j).copied().unwrap_or(false) {
            continue;
        }
        let mag = wj.abs();
        match best {
            Some((_, m)) if mag <= m => {}
            _ => best = Some((j, mag)),
        }
    }
    best.map(|(j, _)| j)
}

#[derive(Debug, Clone)]
enum Workspace<T> {
    Symmetric(PackedSymMatrix<T>),
    Factored { p: ColumnBuffer<T>, d: DiagRecord<T> },
    Pivoted { h: DenseMatrix<T>, used: Vec<bool> },
}

/// Per-sweep state: the minor iterate `y_k` and the projection data.
#[derive(Debug, Clone)]
pub struct MinorState<T> {
    k: usize,
    y: Vector<T>,
    modified: bool,
    workspace: Workspace<T>,
}

/// Search vector for one minor step, ready to be committed.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchDirection<T> {
    pub p: Vector<T>,
    pub delta: T,
    /// `H_k a_k`, the left factor of the rank-one update. Unused when factored.
    pub hu: Option<Vector<T>>,
    pub pivot: Option<usize>,
}

impl<T: Scalar> MinorState<T> {
    pub fn new(y1: Vector<T>, variant: VariantSpec) -> Self {
        let n = y1.len();
        let workspace = match (variant.method, variant.representation) {
            (Method::ImplicitLu, _) => Workspace::Pivoted {
                h: DenseMatrix::identity(n),
                used: vec![false; n],
            },
            (_, Representation::ExplicitH) => Workspace::Symmetric(PackedSymMatrix::identity(n)),
            (_, Representation::FactoredPd) => Workspace::Factored {
                p: ColumnBuffer::new(n),
                d: DiagRecord::with_capacity(n),
            },
        };
        Self { k: 0, y: y1, modified: variant.method == Method::ModifiedHuang, workspace }
    }

    /// Zero-based index of the next minor step.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn y(&self) -> &Vector<T> {
        &self.y
    }

    /// Columns already chosen as pivots; empty unless implicit LU.
    pub fn used_pivots(&self) -> Vec<usize> {
        match &self.workspace {
            Workspace::Pivoted { used, .. } => {
                used.iter().enumerate().filter(|(_, &u)| u).map(|(j, _)| j).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `H_k v` for the current projection, whatever its representation.
    pub fn apply_projection(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError> {
        match &self.workspace {
            Workspace::Symmetric(h) => h.apply(v),
            Workspace::Pivoted { h, .. } => h.apply(v),
            Workspace::Factored { p, d } => v.sub(&vec_outer_apply(p, d, v)?),
        }
    }

    /// Explicit `H_k` as a dense matrix.
    pub fn projection_matrix(&self) -> DenseMatrix<T> {
        match &self.workspace {
            Workspace::Symmetric(h) => h.to_dense(),
            Workspace::Pivoted { h, .. } => h.clone(),
            Workspace::Factored { .. } => {
                let n = self.y.len();
                let mut m = DenseMatrix::zeros(n);
                for j in 0..n {
                    let col = self
                        .apply_projection(&Vector::unit(n, j))
                        .expect("square workspace");
                    for i in 0..n {
                        m.set(i, j, col[i]);
                    }
                }
                m
            }
        }
    }

    fn commit(&mut self, dir: SearchDirection<T>, beta: T) -> Result<(), KernelError> {
        let y = self.y.add_scaled(-beta, &dir.p)?;
        if !y.is_finite() {
            return Err(KernelError::NumericBreakdown { minor: self.k });
        }
        self.y = y;
        match &mut self.workspace {
            Workspace::Symmetric(h) => {
                let hu = dir.hu.as_ref().expect("explicit H carries H a");
                h.rank_one_downdate(hu, &dir.p, dir.delta)?;
            }
            Workspace::Pivoted { h, used } => {
                let hu = dir.hu.as_ref().expect("explicit H carries H a");
                h.rank_one_downdate(hu, &dir.p, dir.delta)?;
                used[dir.pivot.expect("implicit LU carries a pivot")] = true;
            }
            Workspace::Factored { p, d } => {
                p.push_column(&dir.p)?;
                d.push(dir.delta);
            }
        }
        self.k += 1;
        Ok(())
    }

    fn skip(&mut self) {
        self.k += 1;
    }
}

/// Builds `p_k` and `delta_k` for row `a_k` under the current projection.
pub fn form_search_vector<T: Scalar>(
    state: &MinorState<T>,
    a: &Vector<T>,
) -> Result<SearchDirection<T>, KernelError> {
    match &state.workspace {
        Workspace::Symmetric(h) => explicit_direction(h, a, state.modified),
        Workspace::Factored { p, d } => {
            let s = a.sub(&vec_outer_apply(p, d, a)?)?;
            if state.modified {
                let pk = s.sub(&vec_outer_apply(p, d, &s)?)?;
                let delta = pk.dot(&pk)?;
                Ok(SearchDirection { p: pk, delta, hu: None, pivot: None })
            } else {
                let delta = s.dot(a)?;
                Ok(SearchDirection { p: s, delta, hu: None, pivot: None })
            }
        }
        Workspace::Pivoted { h, used } => {
            let w = h.apply(a)?;
            let j = select_pivot(&w, used)
                .ok_or(KernelError::NoAdmissiblePivot { minor: state.k })?;
            let pk = Vector::from_slice(h.row(j))?;
            let delta = pk.dot(a)?;
            Ok(SearchDirection { p: pk, delta, hu: Some(w), pivot: Some(j) })
        }
    }
}

fn explicit_direction<T: Scalar>(
    h: &PackedSymMatrix<T>,
    a: &Vector<T>,
    modified: bool,
) -> Result<SearchDirection<T>, KernelError> {
    let ha = h.apply(a)?;
    if modified {
        let p = h.apply_transpose(&ha)?;
        let delta = p.dot(&p)?;
        Ok(SearchDirection { p, delta, hu: Some(ha), pivot: None })
    } else {
        let delta = ha.dot(a)?;
        Ok(SearchDirection { p: ha.clone(), delta, hu: Some(ha), pivot: None })
    }
}

/// Options for one major iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions<T> {
    /// Dependence tolerance `t`.
    pub t: T,
    pub tol_mode: TolMode,
    /// Evaluate every row and component from the linear model at `y_1`,
    /// making the sweep an exact solve of `J(x) s = -F(x)`.
    pub freeze: bool,
}

/// What one minor step did.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorRecord<T> {
    pub k: usize,
    /// The row `a_k` as evaluated in this step.
    pub row: Vector<T>,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorOutcome<T> {
    /// `y_{n+1}`.
    pub x_next: Vector<T>,
    /// Zero-based rows where the dependence test fired.
    pub skipped_rows: Vec<usize>,
    pub component_evals: usize,
    pub jacobian_element_evals: usize,
}

/// Step-by-step driver for one major iteration.
pub struct Sweep<'a, T: Scalar, O: RowOracle<T> + ?Sized> {
    oracle: &'a O,
    x: Vector<T>,
    state: MinorState<T>,
    options: SweepOptions<T>,
    skipped_rows: Vec<usize>,
    component_evals: usize,
    jacobian_element_evals: usize,
}

impl<'a, T: Scalar, O: RowOracle<T> + ?Sized> Sweep<'a, T, O> {
    pub fn new(
        oracle: &'a O,
        x: &Vector<T>,
        variant: VariantSpec,
        options: SweepOptions<T>,
    ) -> Result<Self, KernelError> {
        let n = oracle.dimension();
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: x.len() }.into());
        }
        if options.t.is_nan() || options.t <= T::zero() {
            return Err(KernelError::InvalidTolerance(options.t.to_f64_lossy()));
        }
        let state = MinorState::new(x.clone(), variant);
        Ok(Self {
            oracle,
            x: x.clone(),
            state,
            options,
            skipped_rows: Vec::new(),
            component_evals: 0,
            jacobian_element_evals: 0,
        })
    }

    pub fn state(&self) -> &MinorState<T> {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.k >= self.x.len()
    }

    /// Runs the next minor step; `None` once all `n` rows are processed.
    pub fn step(&mut self) -> Result<Option<MinorRecord<T>>, KernelError> {
        if self.is_done() {
            return Ok(None);
        }
        let n = self.x.len();
        let k = self.state.k;
        let at = if self.options.freeze { &self.x } else { &self.state.y };
        let a = self.oracle.jacobian_row(k, at);
        self.jacobian_element_evals += n;
        if a.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: a.len() }.into());
        }

        let dir = form_search_vector(&self.state, &a)?;
        if dependence_test(dir.delta, a.inf_norm(), self.options.tol_mode, self.options.t) {
            self.skipped_rows.push(k);
            self.state.skip();
            return Ok(Some(MinorRecord { k, row: a, skipped: true }));
        }

        let f = if self.options.freeze {
            // linear model f_k(x) + a_k(x)^T (y_k - x)
            let shift = self.state.y.sub(&self.x)?;
            self.oracle.component_value(k, &self.x) + a.dot(&shift)?
        } else {
            self.oracle.component_value(k, &self.state.y)
        };
        self.component_evals += 1;

        let beta = f / dir.delta;
        if !beta.is_finite() {
            return Err(KernelError::NumericBreakdown { minor: k });
        }
        self.state.commit(dir, beta)?;
        Ok(Some(MinorRecord { k, row: a, skipped: false }))
    }

    pub fn finish(mut self) -> Result<MajorOutcome<T>, KernelError> {
        while self.step()?.is_some() {}
        Ok(MajorOutcome {
            x_next: self.state.y,
            skipped_rows: self.skipped_rows,
            component_evals: self.component_evals,
            jacobian_element_evals: self.jacobian_element_evals,
        })
    }
}

/// One full major iteration `x_{m-1} -> x_m`.
pub fn major_iteration<T: Scalar, O: RowOracle<T> + ?Sized>(
    oracle: &O,
    x: &Vector<T>,
    variant: VariantSpec,
    options: SweepOptions<T>,
) -> Result<MajorOutcome<T>, KernelError> {
    Sweep::new(oracle, x, variant, options)?.finish()
}
