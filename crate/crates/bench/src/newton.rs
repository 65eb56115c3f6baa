//! Brute-force Newton step by Gaussian elimination, used as a test oracle.

use thiserror::Error;

use nlabs::{LinalgError, RowOracle, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("Jacobian is singular (no pivot in column {column})")]
    Singular { column: usize },
    #[error("system has {rows} rows but {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Solves `a x = b` by elimination with partial pivoting. `a` is row-major.
pub fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, NewtonError> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(NewtonError::NotSquare { rows: a.len(), cols: a.first().map_or(0, Vec::len) });
    }
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = scale * f64::EPSILON * n as f64;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()).then(j.cmp(&i)))
            .unwrap();
        if a[piv][c].is_nan() || a[piv][c].abs() <= floor {
            return Err(NewtonError::Singular { column: c });
        }
        a.swap(c, piv);
        b.swap(c, piv);
        let pivot = a[c].clone();
        for r in c + 1..n {
            let m = a[r][c] / pivot[c];
            if m == 0.0 {
                continue;
            }
            for (v, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                *v -= m * p;
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// `x + t` with `J(x) t = -F(x)`.
pub fn newton_reference_solve<O: RowOracle<f64> + ?Sized>(
    oracle: &O,
    x: &Vector<f64>,
) -> Result<Vector<f64>, NewtonError> {
    let n = oracle.dimension();
    if x.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: x.len() }.into());
    }
    let j: Vec<Vec<f64>> = (0..n).map(|k| oracle.jacobian_row(k, x).into_vec()).collect();
    let rhs: Vec<f64> = oracle.residual(x).iter().map(|f| -f).collect();
    let t = gaussian_solve(j, rhs)?;
    Ok(Vector::new(x.iter().zip(&t).map(|(a, b)| a + b).collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlabs::{DenseMatrix, LinearSystem, Problem};

    #[test]
    fn linear_system_solved_in_one_step() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]).unwrap();
        let b = Vector::new(vec![3.0, 5.0, 5.0]).unwrap();
        let sys = LinearSystem::new(a, b).unwrap();
        let x = newton_reference_solve(&sys, &Vector::new(vec![10.0, -4.0, 7.0]).unwrap()).unwrap();
        for v in x.iter() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rosenbrock_step_by_hand_elimination() {
        // J = [[-1, 0], [24, 10]], F = (2.2, -4.4) at (-1.2, 1).
        let p = Problem::rosenbrock(2).unwrap();
        let x = newton_reference_solve(&p, &p.standard_start::<f64>()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
        assert!((x[1] + 3.84).abs() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let x = gaussian_solve(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_reported() {
        let err = gaussian_solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).unwrap_err();
        assert_eq!(err, NewtonError::Singular { column: 1 });
        let p = Problem::powell_singular();
        let root = Vector::new(vec![0.0; 4]).unwrap();
        assert!(matches!(newton_reference_solve(&p, &root), Err(NewtonError::Singular { .. })));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let p = Problem::powell_singular();
        let x = Vector::new(vec![1.0; 3]).unwrap();
        assert!(matches!(newton_reference_solve(&p, &x), Err(NewtonError::Linalg(_))));
    }
}
