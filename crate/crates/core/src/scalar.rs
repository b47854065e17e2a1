//! Floating-point abstraction shared by every numerical routine in the crate.
//!
//! All model, solver and metric code is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. The dense SVD is the one primitive that is
//! delegated per concrete type (to `nalgebra`), so generic code never has to
//! carry `nalgebra`'s trait bounds.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Svd};

/// Iteration budget handed to the bidiagonal QR sweeps of the SVD.
const SVD_MAX_SWEEPS: usize = 10_000;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Accepted deviation of a transition-matrix row sum from one.
    const ROW_SUM_TOL: f64;
    /// Row sums within this distance of one are renormalized instead of rejected.
    const RENORMALIZE_TOL: f64;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Smallest representable value strictly greater than `self` (finite inputs).
    fn next_up(self) -> Self;

    /// Full thin SVD `m = U diag(s) Vᵀ` with singular values in descending order.
    fn svd(m: &Matrix<Self>) -> Result<Svd<Self>>;

    /// Singular values only, descending.
    fn singular_values(m: &Matrix<Self>) -> Result<Vec<Self>>;
}

macro_rules! impl_scalar {
    ($t:ty, $row_tol:expr, $renorm_tol:expr) => {
        impl Scalar for $t {
            const ROW_SUM_TOL: f64 = $row_tol;
            const RENORMALIZE_TOL: f64 = $renorm_tol;

            fn next_up(self) -> Self {
                <$t>::next_up(self)
            }

            fn svd(m: &Matrix<Self>) -> Result<Svd<Self>> {
                let (rows, cols) = m.shape();
                if rows == 0 || cols == 0 {
                    return Ok(Svd {
                        u: Matrix::zeros(rows, 0),
                        singular_values: Vec::new(),
                        v: Matrix::zeros(cols, 0),
                    });
                }
                let dm = DMatrix::<$t>::from_row_slice(rows, cols, m.as_slice());
                let svd = dm
                    .try_svd(true, true, <$t>::EPSILON, SVD_MAX_SWEEPS)
                    .ok_or(Error::SvdNoConvergence { rows, cols, max_sweeps: SVD_MAX_SWEEPS })?;
                let (u, vt) = match (svd.u, svd.v_t) {
                    (Some(u), Some(vt)) => (u, vt),
                    _ => return Err(Error::SvdNoConvergence { rows, cols, max_sweeps: SVD_MAX_SWEEPS }),
                };
                let k = svd.singular_values.len();
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&a, &b| {
                    svd.singular_values[b]
                        .partial_cmp(&svd.singular_values[a])
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let mut u_out = Matrix::zeros(rows, k);
                let mut v_out = Matrix::zeros(cols, k);
                let mut s_out = Vec::with_capacity(k);
                for (dst, &src) in order.iter().enumerate() {
                    s_out.push(svd.singular_values[src]);
                    for i in 0..rows {
                        u_out[(i, dst)] = u[(i, src)];
                    }
                    for j in 0..cols {
                        v_out[(j, dst)] = vt[(src, j)];
                    }
                }
                Ok(Svd { u: u_out, singular_values: s_out, v: v_out })
            }

            fn singular_values(m: &Matrix<Self>) -> Result<Vec<Self>> {
                let (rows, cols) = m.shape();
                if rows == 0 || cols == 0 {
                    return Ok(Vec::new());
                }
                let dm = DMatrix::<$t>::from_row_slice(rows, cols, m.as_slice());
                let svd = dm
                    .try_svd(false, false, <$t>::EPSILON, SVD_MAX_SWEEPS)
                    .ok_or(Error::SvdNoConvergence { rows, cols, max_sweeps: SVD_MAX_SWEEPS })?;
                let mut s: Vec<$t> = svd.singular_values.iter().copied().collect();
                s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
                Ok(s)
            }
        }
    };
}

impl_scalar!(f64, 1e-9, 1e-6);
// f32 cannot resolve row sums to 1e-9; tolerances scale with its epsilon.
impl_scalar!(f32, 1e-5, 1e-3);
