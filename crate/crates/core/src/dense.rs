//! Small dense linear-algebra substrate shared by the ABS kernels.
//!
//! Only what the kernels need lives here: fixed-length vectors, square
//! matrices in full and packed-symmetric (lower triangle) storage, a
//! column buffer for the factored `P, D` representation, and the rank-one
//! projection update `H - (H u) p^T / delta`.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vectors and matrices must have dimension at least 1")]
    Empty,
    #[error("projection update with degenerate delta ({0:e})")]
    DegenerateDelta(f64),
}

fn check_dim(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// Column vector of fixed, nonzero length.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T> {
    entries: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::Empty);
        }
        Ok(Self { entries })
    }

    pub fn from_slice(entries: &[T]) -> Result<Self, LinalgError> {
        Self::new(entries.to_vec())
    }

    /// Builds a vector from `f64` values, rounding into the target precision.
    pub fn from_f64(entries: &[f64]) -> Result<Self, LinalgError> {
        Self::new(entries.iter().map(|&v| T::lit(v)).collect())
    }

    /// # Panics
    /// If `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "zero-length vector");
        Self { entries: vec![T::zero(); n] }
    }

    /// The `j`-th standard basis vector of length `n`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.entries[j] = T::one();
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v.to_f64_lossy()).collect()
    }

    /// `max_l |v_l|`.
    pub fn inf_norm(&self) -> T {
        inf_norm(&self.entries)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Self) -> Result<T, LinalgError> {
        check_dim(self.len(), other.len())?;
        Ok(dot(&self.entries, &other.entries))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { entries: self.entries.iter().map(|&v| v * c).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self, LinalgError> {
        check_dim(self.len(), other.len())?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| a + c * b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.add_scaled(-T::one(), other)
    }

    /// Elementwise `(self + other) / 2`.
    pub fn midpoint(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim(self.len(), other.len())?;
        let half = T::lit(0.5);
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| (a + b) * half)
                .collect(),
        })
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.entries[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.entries[i]
    }
}

/// ∞-norm of a slice; zero for an empty slice.
pub fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Square projection matrix acting on vectors of length `dim()`.
///
/// `apply` computes `H v`, `apply_transpose` computes `H^T v`. The update
/// replaces `H` by `H - (H u) p^T / delta`; callers that already hold
/// `H u` pass it to [`ProjectionMatrix::rank_one_downdate`] directly.
pub trait ProjectionMatrix<T: Scalar> {
    fn dim(&self) -> usize;
    fn get(&self, i: usize, j: usize) -> T;
    fn apply(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError>;
    fn apply_transpose(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError>;
    /// `H <- H - hu p^T / delta`, with `hu` the precomputed product `H u`.
    fn rank_one_downdate(
        &mut self,
        hu: &Vector<T>,
        p: &Vector<T>,
        delta: T,
    ) -> Result<(), LinalgError>;

    fn projection_update(
        &mut self,
        u: &Vector<T>,
        p: &Vector<T>,
        delta: T,
    ) -> Result<(), LinalgError> {
        let hu = self.apply(u)?;
        self.rank_one_downdate(&hu, p, delta)
    }

    /// Largest absolute row sum.
    fn inf_norm(&self) -> T {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).fold(T::zero(), |s, j| s + self.get(i, j).abs()))
            .fold(T::zero(), T::max)
    }
}

fn check_delta<T: Scalar>(delta: T) -> Result<(), LinalgError> {
    if delta == T::zero() || !delta.is_finite() {
        Err(LinalgError::DegenerateDelta(delta.to_f64_lossy()))
    } else {
        Ok(())
    }
}

/// Square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "zero-dimension matrix");
        Self { n, entries: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = T::one();
        }
        m
    }

    /// Builds from rows; every row must have length equal to the row count.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            check_dim(n, row.len())?;
            entries.extend_from_slice(row);
        }
        Ok(Self { n, entries })
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.entries[i * n + l];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] = out.entries[i * n + j] + a * other.entries[l * n + j];
                }
            }
        }
        Ok(out)
    }
}

impl<T: Scalar> ProjectionMatrix<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    fn apply(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError> {
        check_dim(self.n, v.len())?;
        let out = (0..self.n).map(|i| dot(self.row(i), v.as_slice())).collect();
        Vector::new(out)
    }

    fn apply_transpose(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError> {
        check_dim(self.n, v.len())?;
        let n = self.n;
        let mut out = vec![T::zero(); n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &h) in out.iter_mut().zip(self.row(i)) {
                *o = *o + h * vi;
            }
        }
        Vector::new(out)
    }

    fn rank_one_downdate(
        &mut self,
        hu: &Vector<T>,
        p: &Vector<T>,
        delta: T,
    ) -> Result<(), LinalgError> {
        check_dim(self.n, hu.len())?;
        check_dim(self.n, p.len())?;
        check_delta(delta)?;
        let n = self.n;
        for i in 0..n {
            let c = hu[i] / delta;
            if c == T::zero() {
                continue;
            }
            let row = &mut self.entries[i * n..(i + 1) * n];
            for (h, &pj) in row.iter_mut().zip(p.iter()) {
                *h = *h - c * pj;
            }
        }
        Ok(())
    }
}

/// Symmetric matrix storing only the lower triangle, `n(n+1)/2` scalars.
///
/// `get(i, j)` and `get(j, i)` read the same stored scalar, so symmetry
/// holds bit-exactly whatever updates are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSymMatrix<T> {
    n: usize,
    lower: Vec<T>,
}

impl<T: Scalar> PackedSymMatrix<T> {
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "zero-dimension matrix");
        let mut lower = vec![T::zero(); n * (n + 1) / 2];
        for i in 0..n {
            lower[Self::offset(i, i)] = T::one();
        }
        Self { n, lower }
    }

    #[inline]
    fn offset(i: usize, j: usize) -> usize {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        r * (r + 1) / 2 + c
    }

    pub fn stored_len(&self) -> usize {
        self.lower.len()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }
}

impl<T: Scalar> ProjectionMatrix<T> for PackedSymMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.lower[Self::offset(i, j)]
    }

    fn apply(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError> {
        check_dim(self.n, v.len())?;
        let n = self.n;
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            let base = i * (i + 1) / 2;
            let mut acc = T::zero();
            for j in 0..i {
                let h = self.lower[base + j];
                acc = acc + h * v[j];
                out[j] = out[j] + h * v[i];
            }
            out[i] = out[i] + acc + self.lower[base + i] * v[i];
        }
        Vector::new(out)
    }

    fn apply_transpose(&self, v: &Vector<T>) -> Result<Vector<T>, LinalgError> {
        self.apply(v)
    }

    /// Only the lower triangle of `hu p^T / delta` is formed.
    fn rank_one_downdate(
        &mut self,
        hu: &Vector<T>,
        p: &Vector<T>,
        delta: T,
    ) -> Result<(), LinalgError> {
        check_dim(self.n, hu.len())?;
        check_dim(self.n, p.len())?;
        check_delta(delta)?;
        for i in 0..self.n {
            let c = hu[i] / delta;
            if c == T::zero() {
                continue;
            }
            let base = i * (i + 1) / 2;
            for j in 0..=i {
                self.lower[base + j] = self.lower[base + j] - c * p[j];
            }
        }
        Ok(())
    }
}

/// Denominators `delta_1, .., delta_{k-1}` of the accepted minor steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagRecord<T> {
    entries: Vec<T>,
}

impl<T: Scalar> DiagRecord<T> {
    pub fn with_capacity(n: usize) -> Self {
        Self { entries: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, delta: T) {
        self.entries.push(delta);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }
}

impl<T: Scalar> FromIterator<T> for DiagRecord<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Self { entries: iter.into_iter().collect() }
    }
}

/// Preallocated `n x n` buffer holding the search vectors `p_1, .., p_{k-1}`
/// as its leading columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBuffer<T> {
    n: usize,
    cols: usize,
    // column-major, capacity n columns
    data: Vec<T>,
}

impl<T: Scalar> ColumnBuffer<T> {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "zero-dimension buffer");
        Self { n, cols: 0, data: vec![T::zero(); n * n] }
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[T] {
        assert!(c < self.cols, "column {c} not filled");
        &self.data[c * self.n..(c + 1) * self.n]
    }

    pub fn push_column(&mut self, p: &Vector<T>) -> Result<(), LinalgError> {
        check_dim(self.n, p.len())?;
        if self.cols == self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, found: self.n + 1 });
        }
        let c = self.cols;
        self.data[c * self.n..(c + 1) * self.n].copy_from_slice(p.as_slice());
        self.cols += 1;
        Ok(())
    }
}

/// `P D^{-1} P^T v`, applied right to left without forming the product.
pub fn vec_outer_apply<T: Scalar>(
    p: &ColumnBuffer<T>,
    d: &DiagRecord<T>,
    v: &Vector<T>,
) -> Result<Vector<T>, LinalgError> {
    check_dim(p.cols(), d.len())?;
    check_dim(p.rows(), v.len())?;
    let mut out = Vector::zeros(p.rows());
    for (c, &delta) in d.as_slice().iter().enumerate() {
        let col = p.column(c);
        let coef = dot(col, v.as_slice()) / delta;
        if coef == T::zero() {
            continue;
        }
        for (o, &pc) in out.entries.iter_mut().zip(col) {
            *o = *o + coef * pc;
        }
    }
    Ok(out)
}

/// Dense `M v` for a full matrix.
pub fn mat_vec<T: Scalar>(m: &DenseMatrix<T>, v: &Vector<T>) -> Result<Vector<T>, LinalgError> {
    m.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_slice(x).unwrap()
    }

    #[test]
    fn inf_norm_examples() {
        assert_eq!(v(&[0.0, 0.0, 0.0]).inf_norm(), 0.0);
        assert_eq!(v(&[-1.0, 0.0, 0.0, -2.0]).inf_norm(), 2.0);
        assert_eq!(v(&[-7.0, -2.2360680, 1.0, 12.6491106]).inf_norm(), 12.6491106);
    }

    #[test]
    fn empty_vector_rejected() {
        assert_eq!(Vector::<f64>::new(vec![]), Err(LinalgError::Empty));
    }

    #[test]
    fn projection_update_onto_e1_complement() {
        for (u, p) in [([1.0, 0.0], [1.0, 0.0]), ([-1.0, 0.0], [-1.0, 0.0])] {
            let mut h = DenseMatrix::<f64>::identity(2);
            h.projection_update(&v(&u), &v(&p), 1.0).unwrap();
            assert_eq!(h, DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap());

            let mut s = PackedSymMatrix::<f64>::identity(2);
            s.projection_update(&v(&u), &v(&p), 1.0).unwrap();
            assert_eq!(s.to_dense(), h);
        }
    }

    #[test]
    fn degenerate_delta_reported() {
        let mut h = DenseMatrix::<f64>::identity(2);
        let err = h.projection_update(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 0.0);
        assert!(matches!(err, Err(LinalgError::DegenerateDelta(_))));
    }

    #[test]
    fn packed_storage_is_half() {
        let s = PackedSymMatrix::<f64>::identity(10);
        assert_eq!(s.stored_len(), 55);
    }

    #[test]
    fn outer_apply_examples() {
        let empty = ColumnBuffer::<f64>::new(2);
        let out = vec_outer_apply(&empty, &DiagRecord::default(), &v(&[3.0, 4.0])).unwrap();
        assert_eq!(out, v(&[0.0, 0.0]));

        let mut p = ColumnBuffer::new(2);
        p.push_column(&v(&[1.0, 0.0])).unwrap();
        let d: DiagRecord<f64> = [1.0].into_iter().collect();
        assert_eq!(vec_outer_apply(&p, &d, &v(&[3.0, 4.0])).unwrap(), v(&[3.0, 0.0]));

        let mut p = ColumnBuffer::new(2);
        p.push_column(&v(&[1.0, 1.0])).unwrap();
        let d: DiagRecord<f64> = [2.0].into_iter().collect();
        assert_eq!(vec_outer_apply(&p, &d, &v(&[2.0, 0.0])).unwrap(), v(&[1.0, 1.0]));
    }

    #[test]
    fn outer_apply_dimension_mismatch() {
        let mut p = ColumnBuffer::new(2);
        p.push_column(&v(&[1.0, 0.0])).unwrap();
        let err = vec_outer_apply(&p, &DiagRecord::default(), &v(&[1.0, 1.0]));
        assert!(matches!(err, Err(LinalgError::DimensionMismatch { .. })));
        let d: DiagRecord<f64> = [1.0].into_iter().collect();
        let err = vec_outer_apply(&p, &d, &v(&[1.0, 1.0, 1.0]));
        assert!(matches!(err, Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn packed_apply_matches_dense() {
        let mut s = PackedSymMatrix::<f64>::identity(3);
        s.rank_one_downdate(&v(&[1.0, 2.0, 3.0]), &v(&[0.5, -1.0, 0.25]), 2.0).unwrap();
        let d = s.to_dense();
        let x = v(&[0.3, -0.7, 1.1]);
        let a = s.apply(&x).unwrap();
        let b = d.apply(&x).unwrap();
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-15);
        }
    }

    fn matrix_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, n * n)
    }

    proptest! {
        #[test]
        fn update_annihilates_u(entries in matrix_strategy(5), u in prop::collection::vec(-1.0f64..1.0, 5), z in prop::collection::vec(-1.0f64..1.0, 5)) {
            let rows: Vec<Vec<f64>> = entries.chunks(5).map(|c| c.to_vec()).collect();
            let mut h = DenseMatrix::from_rows(&rows).unwrap();
            let u = v(&u);
            let p = h.apply_transpose(&v(&z)).unwrap();
            let delta = p.dot(&u).unwrap();
            prop_assume!(delta.abs() > 1e-3);
            let scale = h.inf_norm() * u.inf_norm();
            h.projection_update(&u, &p, delta).unwrap();
            let hu = h.apply(&u).unwrap();
            prop_assert!(hu.inf_norm() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn packed_reads_are_symmetric(hu in prop::collection::vec(-3.0f64..3.0, 6), p in prop::collection::vec(-3.0f64..3.0, 6), delta in 0.1f64..4.0) {
            let mut s = PackedSymMatrix::identity(6);
            s.rank_one_downdate(&v(&hu), &v(&p), delta).unwrap();
            s.rank_one_downdate(&v(&p), &v(&hu), -delta).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    prop_assert_eq!(s.get(i, j).to_bits(), s.get(j, i).to_bits());
                }
            }
        }

        #[test]
        fn outer_apply_idempotent_on_orthogonal_columns(a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 4), w in prop::collection::vec(-1.0f64..1.0, 4)) {
            // Gram-Schmidt two columns
            let a = v(&a);
            prop_assume!(a.inf_norm() > 0.1);
            let b = v(&b);
            let proj = b.dot(&a).unwrap() / a.dot(&a).unwrap();
            let b = b.add_scaled(-proj, &a).unwrap();
            prop_assume!(b.inf_norm() > 0.1);
            let mut p = ColumnBuffer::new(4);
            p.push_column(&a).unwrap();
            p.push_column(&b).unwrap();
            let d: DiagRecord<f64> = [a.dot(&a).unwrap(), b.dot(&b).unwrap()].into_iter().collect();
            let once = vec_outer_apply(&p, &d, &v(&w)).unwrap();
            let twice = vec_outer_apply(&p, &d, &once).unwrap();
            prop_assert!(twice.sub(&once).unwrap().inf_norm() <= 1e-12);
        }
    }
}
