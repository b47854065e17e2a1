//! Small dense row-major matrix used for transition matrices, duals and
//! infectivity matrices.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length does not match shape");
        Self { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Zeroes every entry above the main diagonal.
    pub fn zero_upper(&mut self) {
        for i in 0..self.rows {
            let start = (i + 1).min(self.cols);
            for x in &mut self.row_mut(i)[start..] {
                *x = T::zero();
            }
        }
    }

    /// True if every entry above the main diagonal is exactly zero.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| self.row(i).iter().skip(i + 1).all(|&x| x == T::zero()))
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&x| x != T::zero()).count()
    }

    /// Casts entry-wise to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Thin singular value decomposition; columns of `u` and `v` pair with
/// `singular_values`, which are sorted in descending order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    /// Rebuilds `U diag(f(s)) Vᵀ`, skipping components mapped to zero.
    pub fn reconstruct(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let (rows, cols) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(rows, cols);
        for (k, &s) in self.singular_values.iter().enumerate() {
            let s = f(s);
            if s == T::zero() {
                continue;
            }
            for i in 0..rows {
                let us = self.u[(i, k)] * s;
                if us == T::zero() {
                    continue;
                }
                for j in 0..cols {
                    out[(i, j)] = out[(i, j)] + us * self.v[(j, k)];
                }
            }
        }
        out
    }

    /// Like [`Svd::reconstruct`] but only fills the lower triangle (including
    /// the diagonal); the strict upper triangle is left at zero.
    pub fn reconstruct_lower(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let (rows, cols) = (self.u.rows(), self.v.rows());
        let kept: Vec<(usize, T)> = self
            .singular_values
            .iter()
            .enumerate()
            .map(|(k, &s)| (k, f(s)))
            .filter(|&(_, s)| s != T::zero())
            .collect();
        let mut out = Matrix::zeros(rows, cols);
        if kept.is_empty() {
            return out;
        }
        // Row-major copies of the retained singular vectors for contiguous dot products.
        let r = kept.len();
        let mut us = vec![T::zero(); rows * r];
        let mut vs = vec![T::zero(); cols * r];
        for (slot, &(k, s)) in kept.iter().enumerate() {
            for i in 0..rows {
                us[i * r + slot] = self.u[(i, k)] * s;
            }
            for j in 0..cols {
                vs[j * r + slot] = self.v[(j, k)];
            }
        }
        for i in 0..rows {
            let ui = &us[i * r..(i + 1) * r];
            for j in 0..=i.min(cols.saturating_sub(1)) {
                let vj = &vs[j * r..(j + 1) * r];
                out[(i, j)] = ui.iter().zip(vj).map(|(&a, &b)| a * b).sum();
            }
        }
        out
    }
}
