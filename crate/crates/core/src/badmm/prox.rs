//! The closed-form update blocks of the Bregman ADMM iteration. Every
//! operator works on the lower-triangular support and leaves the strict upper
//! triangle at exactly zero.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::model::TransitionMatrix;
use crate::scalar::Scalar;

/// `sign(a)·max(|a| − τ, 0)`.
#[inline]
pub fn soft_threshold<T: Scalar>(a: T, tau: T) -> T {
    debug_assert!(tau >= T::zero());
    if a > tau {
        a - tau
    } else if a < -tau {
        a + tau
    } else {
        T::zero()
    }
}

fn check_square(n: usize, m: &Matrix<impl Scalar>, what: &str) {
    assert_eq!(m.shape(), (n, n), "{what} must be {n}x{n}");
}

/// KL-Bregman step: row-wise softmax of
/// `(log B0 + ρ Σᵢ (log Xᵢ − Zᵢ)) / (1 + 2ρ)` over columns `0..=n` of row `n`.
///
/// Entries of `B0`, `X1`, `X2` below `floor` (including zeros and negatives)
/// are clamped to `floor` before the logarithm.
///
/// Panics if the shapes disagree.
pub fn b_update<T: Scalar>(
    b0: &TransitionMatrix<T>,
    x1: &Matrix<T>,
    x2: &Matrix<T>,
    z1: &Matrix<T>,
    z2: &Matrix<T>,
    rho: T,
    floor: T,
) -> TransitionMatrix<T> {
    let n = b0.n();
    for (m, what) in [(x1, "X1"), (x2, "X2"), (z1, "Z1"), (z2, "Z2")] {
        check_square(n, m, what);
    }
    let ln = |x: T| x.max(floor).ln();
    let denom = T::one() + rho + rho;
    let mut out = Matrix::zeros(n, n);
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        scores.clear();
        let (b0r, x1r, x2r, z1r, z2r) = (b0.support_row(i), x1.row(i), x2.row(i), z1.row(i), z2.row(i));
        for j in 0..=i {
            let s = ln(b0r[j]) + rho * (ln(x1r[j]) - z1r[j] + ln(x2r[j]) - z2r[j]);
            scores.push(s / denom);
        }
        let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
        let row = &mut out.row_mut(i)[..=i];
        let mut total = T::zero();
        for (o, &s) in row.iter_mut().zip(&scores) {
            *o = (s - max).exp();
            total = total + *o;
        }
        for o in row.iter_mut() {
            *o = *o / total;
        }
    }
    TransitionMatrix::from_normalized(out)
}

/// `X1 = S_{λα/ρ}(B + Z1)` on the lower-triangular support.
pub fn x1_update<T: Scalar>(b: &TransitionMatrix<T>, z1: &Matrix<T>, lambda: T, alpha: T, rho: T) -> Matrix<T> {
    let n = b.n();
    check_square(n, z1, "Z1");
    let tau = lambda * alpha / rho;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let (br, zr) = (b.support_row(i), &z1.row(i)[..=i]);
        for (o, (&bv, &zv)) in out.row_mut(i)[..=i].iter_mut().zip(br.iter().zip(zr)) {
            *o = soft_threshold(bv + zv, tau);
        }
    }
    out
}

fn lower_sum<T: Scalar>(b: &TransitionMatrix<T>, z: &Matrix<T>) -> Matrix<T> {
    let n = b.n();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            m[(i, j)] = b.get(i, j) + z[(i, j)];
        }
    }
    m
}

/// Singular-value shrinkage of `B + Z2` at `λ(1−α)/ρ`, then the strict upper
/// triangle of the reconstruction is zeroed.
pub fn x2_update_nuclear<T: Scalar>(
    b: &TransitionMatrix<T>,
    z2: &Matrix<T>,
    lambda: T,
    alpha: T,
    rho: T,
) -> Result<Matrix<T>> {
    check_square(b.n(), z2, "Z2");
    let tau = lambda * (T::one() - alpha) / rho;
    let m = lower_sum(b, z2);
    let svd = T::svd(&m)?;
    Ok(svd.reconstruct_lower(|s| (s - tau).max(T::zero())))
}

/// Sparse-group-lasso prox, column by column: soft-threshold the column of
/// `B + Z2` at `λα/ρ`, then scale it by
/// `τ_n = (1 − λ(1−α) / (ρ‖S(·)‖₂))₊` (zero when the thresholded column is zero).
pub fn x2_update_group<T: Scalar>(b: &TransitionMatrix<T>, z2: &Matrix<T>, lambda: T, alpha: T, rho: T) -> Matrix<T> {
    let n = b.n();
    check_square(n, z2, "Z2");
    let inner = lambda * alpha / rho;
    let group = lambda * (T::one() - alpha) / rho;
    let mut out = Matrix::zeros(n, n);
    let mut column = Vec::with_capacity(n);
    for j in 0..n {
        column.clear();
        column.extend((j..n).map(|i| soft_threshold(b.get(i, j) + z2[(i, j)], inner)));
        let norm = column.iter().map(|&v| v * v).sum::<T>().sqrt();
        let scale = if norm > T::zero() { (T::one() - group / norm).max(T::zero()) } else { T::zero() };
        if scale == T::zero() {
            continue;
        }
        for (i, &v) in (j..n).zip(&column) {
            out[(i, j)] = scale * v;
        }
    }
    out
}

/// Scaled dual ascent `Z + (B − X)` on the lower-triangular support.
pub fn dual_update<T: Scalar>(z: &Matrix<T>, b: &TransitionMatrix<T>, x: &Matrix<T>) -> Matrix<T> {
    let n = b.n();
    check_square(n, z, "Z");
    check_square(n, x, "X");
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            out[(i, j)] = z[(i, j)] + b.get(i, j) - x[(i, j)];
        }
    }
    out
}

/// `‖B − X‖_F` over the lower-triangular support.
pub fn primal_residual<T: Scalar>(b: &TransitionMatrix<T>, x: &Matrix<T>) -> T {
    let n = b.n();
    let mut acc = T::zero();
    for i in 0..n {
        for (&bv, &xv) in b.support_row(i).iter().zip(x.row(i)) {
            let d = bv - xv;
            acc = acc + d * d;
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm(rows: &[Vec<f64>]) -> TransitionMatrix<f64> {
        TransitionMatrix::from_rows(rows).unwrap()
    }

    fn sample() -> TransitionMatrix<f64> {
        tm(&[vec![1.0, 0.0, 0.0], vec![0.3, 0.7, 0.0], vec![0.2, 0.5, 0.3]])
    }

    #[test]
    fn soft_threshold_examples() {
        assert!((soft_threshold(1.2f64, 0.5) - 0.7).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert!((soft_threshold(-0.8f64, 0.5) + 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(0.42, 0.0), 0.42);
    }

    #[test]
    fn b_update_fixed_point() {
        let b0 = sample();
        let z = Matrix::zeros(3, 3);
        let x = b0.as_matrix().clone();
        let b = b_update(&b0, &x, &x, &z, &z, 1.0, 1e-12);
        assert!(b.as_matrix().sub(b0.as_matrix()).max_abs() < 1e-15);
        let one = TransitionMatrix::identity(1);
        let m = Matrix::filled(1, 1, -3.0);
        assert_eq!(b_update(&one, &m, &m, &m, &m, 2.0, 1e-12).get(0, 0), 1.0);
    }

    #[test]
    fn b_update_survives_zeros_and_negatives() {
        let b0 = sample();
        let x1 = Matrix::from_rows(&[vec![0.0, 0.0, 0.0], vec![-0.2, 0.9, 0.0], vec![0.0, 0.0, 0.4]]);
        let z = Matrix::zeros(3, 3);
        let b = b_update(&b0, &x1, &x1, &z, &z, 1.0, 1e-12);
        assert!(b.max_row_deviation() < 1e-12);
        assert!(b.as_matrix().is_lower_triangular());
        assert!(b.as_matrix().as_slice().iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn x1_update_examples() {
        let b = sample();
        let z = Matrix::from_fn(3, 3, |i, j| if j <= i { 0.01 * (i + j) as f64 } else { 0.0 });
        let x = x1_update(&b, &z, 0.0, 0.5, 1.0);
        let expected = Matrix::from_fn(3, 3, |i, j| if j <= i { b.get(i, j) + z[(i, j)] } else { 0.0 });
        assert_eq!(x, expected);
        let dead = x1_update(&b, &Matrix::zeros(3, 3), 10.0, 0.5, 1.0);
        assert_eq!(dead.count_nonzero(), 0);
    }

    #[test]
    fn nuclear_diagonal_example() {
        let b = TransitionMatrix::<f64>::identity(3);
        // B + Z2 = diag(3, 1, 0.2)
        let z = Matrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, -0.8]]);
        let x = x2_update_nuclear(&b, &z, 1.0, 0.5, 1.0).unwrap();
        let expected = Matrix::from_rows(&[vec![2.5, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.0]]);
        assert!(x.sub(&expected).max_abs() < 1e-12);
    }

    #[test]
    fn nuclear_zero_threshold_is_identity() {
        let b = sample();
        let z = Matrix::from_fn(3, 3, |i, j| if j <= i { 0.1 * i as f64 - 0.05 * j as f64 } else { 0.0 });
        let x = x2_update_nuclear(&b, &z, 0.0, 0.5, 1.0).unwrap();
        let x_alpha_one = x2_update_nuclear(&b, &z, 3.0, 1.0, 1.0).unwrap();
        let expected = Matrix::from_fn(3, 3, |i, j| if j <= i { b.get(i, j) + z[(i, j)] } else { 0.0 });
        assert!(x.sub(&expected).max_abs() < 1e-10);
        assert!(x_alpha_one.sub(&expected).max_abs() < 1e-10);
    }

    #[test]
    fn group_update_examples() {
        let b = sample();
        let z = Matrix::zeros(3, 3);
        assert!(x2_update_group(&b, &z, 0.0, 0.3, 1.0).sub(b.as_matrix()).max_abs() < 1e-15);
        // column 2 holds only 0.3; threshold λα/ρ = 0.05 leaves 0.25 <= λ(1−α)/ρ = 0.45
        let x = x2_update_group(&b, &z, 0.5, 0.1, 1.0);
        assert_eq!(x[(2, 2)], 0.0);
        assert!(x.is_lower_triangular());
    }

    #[test]
    fn dual_update_examples() {
        let b = sample();
        let z = Matrix::from_fn(3, 3, |i, j| if j <= i { 0.3 } else { 0.0 });
        assert!(dual_update(&z, &b, b.as_matrix()).sub(&z).max_abs() < 1e-15);
        let zero = Matrix::zeros(3, 3);
        assert_eq!(&dual_update(&zero, &b, &zero), b.as_matrix());
        let x = x1_update(&b, &zero, 0.4, 0.5, 1.0);
        let before = primal_residual(&b, &x);
        let after = dual_update(&zero, &b, &x);
        assert!((after.frobenius_norm() - before).abs() < 1e-15);
    }
}
