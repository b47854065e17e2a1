//! Sinkhorn scaling followed by lower-triangular masking, kept as a baseline
//! to show that the masked doubly-stochastic matrix is no longer row-stochastic.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornOutput<T> {
    /// Scaled matrix with its strict upper triangle zeroed. Not a transition matrix.
    pub matrix: Matrix<T>,
    pub iterations: usize,
    /// Largest deviation of a row or column sum from one before masking.
    pub scaling_deviation: T,
    /// Largest deviation of a row sum from one after masking.
    pub max_row_deviation: T,
    /// Whether the masked rows still sum to one within `tol`.
    pub row_stochastic: bool,
}

/// Alternates row and column normalization of a nonnegative square score
/// matrix on its positive support for at most `iters` rounds (or until every
/// row and column sum is within `tol` of one), then masks the upper triangle.
pub fn sinkhorn_baseline<T: Scalar>(scores: &Matrix<T>, iters: usize, tol: T) -> Result<SinkhornOutput<T>> {
    if !scores.is_square() {
        return Err(Error::shape("sinkhorn_baseline", "square matrix", format!("{:?}", scores.shape())));
    }
    if let Some(x) = scores.as_slice().iter().find(|x| !(**x >= T::zero()) || !x.is_finite()) {
        return Err(Error::param("scores", format!("entries must be finite and nonnegative, got {x}")));
    }
    let n = scores.rows();
    let mut m = scores.clone();
    let row_sums = |m: &Matrix<T>| (0..n).map(|i| m.row(i).iter().copied().sum()).collect::<Vec<T>>();
    let col_sums = |m: &Matrix<T>| (0..n).map(|j| (0..n).map(|i| m[(i, j)]).sum()).collect::<Vec<T>>();
    if let Some(i) = row_sums(&m).iter().position(|&s| s <= T::zero()) {
        return Err(Error::param("scores", format!("row {i} has no positive entry")));
    }
    if let Some(j) = col_sums(&m).iter().position(|&s| s <= T::zero()) {
        return Err(Error::param("scores", format!("column {j} has no positive entry")));
    }
    let deviation = |m: &Matrix<T>| {
        row_sums(m)
            .into_iter()
            .chain(col_sums(m))
            .map(|s| (s - T::one()).abs())
            .fold(T::zero(), T::max)
    };

    let mut iterations = 0;
    let mut dev = deviation(&m);
    while iterations < iters && dev >= tol {
        for (i, s) in row_sums(&m).into_iter().enumerate() {
            for x in m.row_mut(i) {
                *x = *x / s;
            }
        }
        let cs = col_sums(&m);
        for i in 0..n {
            for (x, &s) in m.row_mut(i).iter_mut().zip(&cs) {
                *x = *x / s;
            }
        }
        iterations += 1;
        dev = deviation(&m);
    }

    m.zero_upper();
    let max_row_deviation = row_sums(&m).into_iter().map(|s| (s - T::one()).abs()).fold(T::zero(), T::max);
    Ok(SinkhornOutput { matrix: m, iterations, scaling_deviation: dev, max_row_deviation, row_stochastic: max_row_deviation <= tol })
}
