//! Test systems with analytic Jacobian rows.
//!
//! * Extended Rosenbrock (`n` even): `f_{2i-1} = 1 - x_{2i-1}`,
//!   `f_{2i} = 10 (x_{2i} - x_{2i-1}^2)`, start `(-1.2, 1, -1.2, 1, ...)`.
//! * Powell singular (`n = 4`): start `(3, -1, 0, 1)`. The Jacobian is
//!   singular at the root `x* = 0`, where rows 3 and 4 vanish.
//! * Brown almost linear (`n >= 2`): `f_i = x_i + sum_j x_j - (n + 1)` for
//!   `i < n` and `f_n = prod_j x_j - 1`, start `x_i = 1/2`.
//! * Schubert-Broyden tridiagonal (`n >= 3`), start `x_i = -1`.
//!
//! Rows are always returned dense, length `n`. `k` is zero-based.

use std::fmt;

use thiserror::Error;

use crate::dense::{DenseMatrix, LinalgError, ProjectionMatrix, Vector};
use crate::kernel::RowOracle;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("{problem} does not admit n = {n} ({constraint})")]
    InvalidDimension { problem: &'static str, n: usize, constraint: &'static str },
    #[error("unknown problem {0:?}")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Rosenbrock { n: usize },
    PowellSingular,
    BrownAlmostLinear { n: usize },
    SchubertBroyden { n: usize },
}

impl Problem {
    pub fn rosenbrock(n: usize) -> Result<Self, ProblemError> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(ProblemError::InvalidDimension {
                problem: "rosenbrock",
                n,
                constraint: "even, >= 2",
            });
        }
        Ok(Self::Rosenbrock { n })
    }

    pub fn powell_singular() -> Self {
        Self::PowellSingular
    }

    pub fn brown_almost_linear(n: usize) -> Result<Self, ProblemError> {
        if n < 2 {
            return Err(ProblemError::InvalidDimension { problem: "brown", n, constraint: ">= 2" });
        }
        Ok(Self::BrownAlmostLinear { n })
    }

    pub fn schubert_broyden(n: usize) -> Result<Self, ProblemError> {
        if n < 3 {
            return Err(ProblemError::InvalidDimension {
                problem: "schubert",
                n,
                constraint: ">= 3",
            });
        }
        Ok(Self::SchubertBroyden { n })
    }

    /// Looks a problem up by its short name (`rosenbrock`, `powell`, `brown`,
    /// `schubert`). Powell ignores `n` unless it differs from 4.
    pub fn by_name(name: &str, n: usize) -> Result<Self, ProblemError> {
        match name {
            "rosenbrock" => Self::rosenbrock(n),
            "powell" => {
                if n == 4 {
                    Ok(Self::PowellSingular)
                } else {
                    Err(ProblemError::InvalidDimension { problem: "powell", n, constraint: "== 4" })
                }
            }
            "brown" => Self::brown_almost_linear(n),
            "schubert" => Self::schubert_broyden(n),
            other => Err(ProblemError::Unknown(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rosenbrock { .. } => "rosenbrock",
            Self::PowellSingular => "powell",
            Self::BrownAlmostLinear { .. } => "brown",
            Self::SchubertBroyden { .. } => "schubert",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::Rosenbrock { n } | Self::BrownAlmostLinear { n } | Self::SchubertBroyden { n } => n,
            Self::PowellSingular => 4,
        }
    }

    pub fn admissible_n(&self) -> &'static str {
        match self {
            Self::Rosenbrock { .. } => "even, >= 2",
            Self::PowellSingular => "== 4",
            Self::BrownAlmostLinear { .. } => ">= 2",
            Self::SchubertBroyden { .. } => ">= 3",
        }
    }

    pub fn standard_start<T: Scalar>(&self) -> Vector<T> {
        let n = self.n();
        let x: Vec<f64> = match self {
            Self::Rosenbrock { .. } => {
                (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect()
            }
            Self::PowellSingular => vec![3.0, -1.0, 0.0, 1.0],
            Self::BrownAlmostLinear { .. } => vec![0.5; n],
            Self::SchubertBroyden { .. } => vec![-1.0; n],
        };
        Vector::from_f64(&x).expect("n >= 2")
    }

    /// `factor * x0`, computed in `f64` and then rounded to `T`.
    pub fn scale_start<T: Scalar>(&self, factor: f64) -> Vector<T> {
        let x0: Vector<f64> = self.standard_start();
        let scaled: Vec<f64> = x0.iter().map(|&v| factor * v).collect();
        Vector::from_f64(&scaled).expect("n >= 2")
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rosenbrock { n: 2 } => write!(f, "Rosenbrock n=2"),
            Self::Rosenbrock { n } => write!(f, "Extended Rosenbrock n={n}"),
            Self::PowellSingular => write!(f, "Powell singular n=4"),
            Self::BrownAlmostLinear { n } => write!(f, "Brown almost linear n={n}"),
            Self::SchubertBroyden { n } => write!(f, "Schubert Broyden n={n}"),
        }
    }
}

impl<T: Scalar> RowOracle<T> for Problem {
    fn dimension(&self) -> usize {
        self.n()
    }

    fn component_value(&self, k: usize, y: &Vector<T>) -> T {
        let c = T::lit;
        match *self {
            Self::Rosenbrock { .. } => {
                if k.is_multiple_of(2) {
                    T::one() - y[k]
                } else {
                    let x1 = y[k - 1];
                    c(10.0) * (y[k] - x1 * x1)
                }
            }
            Self::PowellSingular => match k {
                0 => y[0] + c(10.0) * y[1],
                1 => c(5.0).sqrt() * (y[2] - y[3]),
                2 => {
                    let d = y[1] - c(2.0) * y[2];
                    d * d
                }
                3 => {
                    let d = y[0] - y[3];
                    c(10.0).sqrt() * d * d
                }
                _ => panic!("powell singular has 4 components, asked for {k}"),
            },
            Self::BrownAlmostLinear { n } => {
                if k + 1 < n {
                    let sum = y.iter().fold(T::zero(), |s, &v| s + v);
                    y[k] + sum - T::lit((n + 1) as f64)
                } else {
                    y.iter().fold(T::one(), |p, &v| p * v) - T::one()
                }
            }
            Self::SchubertBroyden { n } => {
                let xk = y[k];
                let mut f = (c(3.0) - xk) * xk + T::one();
                if k > 0 {
                    f = f - y[k - 1];
                }
                if k + 1 < n {
                    f = f - c(2.0) * y[k + 1];
                }
                f
            }
        }
    }

    fn jacobian_row(&self, k: usize, y: &Vector<T>) -> Vector<T> {
        let c = T::lit;
        let n = self.n();
        let mut row = Vector::zeros(n);
        match *self {
            Self::Rosenbrock { .. } => {
                if k.is_multiple_of(2) {
                    row[k] = -T::one();
                } else {
                    row[k - 1] = c(-20.0) * y[k - 1];
                    row[k] = c(10.0);
                }
            }
            Self::PowellSingular => match k {
                0 => {
                    row[0] = T::one();
                    row[1] = c(10.0);
                }
                1 => {
                    row[2] = c(5.0).sqrt();
                    row[3] = -c(5.0).sqrt();
                }
                2 => {
                    let d = c(2.0) * (y[1] - c(2.0) * y[2]);
                    row[1] = d;
                    row[2] = c(-2.0) * d;
                }
                3 => {
                    let d = c(2.0) * c(10.0).sqrt() * (y[0] - y[3]);
                    row[0] = d;
                    row[3] = -d;
                }
                _ => panic!("powell singular has 4 components, asked for {k}"),
            },
            Self::BrownAlmostLinear { .. } => {
                if k + 1 < n {
                    for l in 0..n {
                        row[l] = T::one();
                    }
                    row[k] = c(2.0);
                } else {
                    for l in 0..n {
                        row[l] = (0..n)
                            .filter(|&j| j != l)
                            .fold(T::one(), |p, j| p * y[j]);
                    }
                }
            }
            Self::SchubertBroyden { .. } => {
                row[k] = c(3.0) - c(2.0) * y[k];
                if k > 0 {
                    row[k - 1] = -T::one();
                }
                if k + 1 < n {
                    row[k + 1] = c(-2.0);
                }
            }
        }
        row
    }
}

/// Affine system `F(x) = A x - b`; its Jacobian rows are the rows of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T> {
    a: DenseMatrix<T>,
    b: Vector<T>,
}

impl<T: Scalar> LinearSystem<T> {
    pub fn new(a: DenseMatrix<T>, b: Vector<T>) -> Result<Self, LinalgError> {
        if a.dim() != b.len() {
            return Err(LinalgError::DimensionMismatch { expected: a.dim(), found: b.len() });
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn rhs(&self) -> &Vector<T> {
        &self.b
    }
}

impl<T: Scalar> RowOracle<T> for LinearSystem<T> {
    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn component_value(&self, k: usize, y: &Vector<T>) -> T {
        self.a.row(k).iter().zip(y.iter()).fold(-self.b[k], |s, (&a, &x)| s + a * x)
    }

    fn jacobian_row(&self, k: usize, _y: &Vector<T>) -> Vector<T> {
        Vector::from_slice(self.a.row(k)).expect("n >= 1")
    }
}

/// Central-difference approximation of row `k` at `y` with step `h`.
pub fn fd_jacobian_row<T: Scalar, O: RowOracle<T> + ?Sized>(
    oracle: &O,
    k: usize,
    y: &Vector<T>,
    h: T,
) -> Vector<T> {
    let n = oracle.dimension();
    let two_h = T::lit(2.0) * h;
    let mut row = Vector::zeros(n);
    for l in 0..n {
        let mut plus = y.clone();
        plus[l] = plus[l] + h;
        let mut minus = y.clone();
        minus[l] = minus[l] - h;
        row[l] = (oracle.component_value(k, &plus) - oracle.component_value(k, &minus)) / two_h;
    }
    row
}
