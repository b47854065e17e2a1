use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Lower-triangular, row-stochastic matrix of event-branch weights.
///
/// Entry `(n, m)` with `m <= n` weights event `m` as the cause of event `n`;
/// the diagonal holds the background (immigrant) weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    inner: Matrix<T>,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Validates the matrix. Rows whose sums are off by more than
    /// `T::ROW_SUM_TOL` but within `T::RENORMALIZE_TOL` are rescaled.
    pub fn new(mut m: Matrix<T>) -> Result<Self> {
        let bad = |invariant: &'static str, detail: String| Error::InvalidTransitionMatrix { invariant, detail };
        if !m.is_square() {
            return Err(bad("square", format!("shape {:?}", m.shape())));
        }
        let n = m.rows();
        let tol = T::lit(T::ROW_SUM_TOL);
        let renorm = T::lit(T::RENORMALIZE_TOL);
        for i in 0..n {
            let row = m.row(i);
            if let Some(j) = row.iter().skip(i + 1).position(|&x| x != T::zero()) {
                return Err(bad("lower-triangular", format!("nonzero entry at ({i}, {})", i + 1 + j)));
            }
            if let Some(j) = row.iter().position(|x| !(*x >= T::zero()) || !x.is_finite()) {
                return Err(bad("nonnegative", format!("entry ({i}, {j}) = {}", row[j])));
            }
            let sum: T = row.iter().copied().sum();
            let dev = (sum - T::one()).abs();
            if dev > renorm {
                return Err(bad("row-stochastic", format!("row {i} sums to {sum}")));
            }
            if dev > tol {
                for x in m.row_mut(i) {
                    *x = *x / sum;
                }
            }
        }
        Ok(Self { inner: m })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(Error::InvalidTransitionMatrix { invariant: "square", detail: "ragged or non-square rows".into() });
        }
        Self::new(Matrix::from_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Matrix::identity(n) }
    }

    /// Built by callers that normalize rows themselves (softmax, responsibilities).
    pub(crate) fn from_normalized(m: Matrix<T>) -> Self {
        debug_assert!(m.is_square() && m.is_lower_triangular());
        debug_assert!((0..m.rows()).all(|i| {
            let s: T = m.row(i).iter().copied().sum();
            (s - T::one()).abs() <= T::lit(T::RENORMALIZE_TOL)
        }));
        Self { inner: m }
    }

    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.inner
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> T {
        self.inner[(n, m)]
    }

    /// The supported part of row `n`: columns `0..=n`.
    #[inline]
    pub fn support_row(&self, n: usize) -> &[T] {
        &self.inner.row(n)[..=n]
    }

    pub fn max_row_deviation(&self) -> T {
        (0..self.n())
            .map(|i| (self.inner.row(i).iter().copied().sum::<T>() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    pub fn cast<U: Scalar>(&self) -> TransitionMatrix<U> {
        TransitionMatrix { inner: self.inner.cast() }
    }
}
