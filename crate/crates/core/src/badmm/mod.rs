//! Bregman ADMM structuring of a transition matrix.
//!
//! Given a prior `B0` (an E-step responsibility matrix or any externally
//! produced row-stochastic lower-triangular map), the solver approximately
//! minimizes
//!
//! ```text
//! KL(B ‖ B0) + λ (α ‖B‖₁ + (1 − α) R(B))   over row-stochastic lower-triangular B
//! ```
//!
//! with `R` the nuclear norm or the column-wise ℓ1,2 norm. The problem is split
//! as `B = X1 = X2`; `B` is updated by a KL-Bregman step (row softmax), `X1`
//! and `X2` by Euclidean proximal steps, and the scaled duals `Z1`, `Z2` by
//! dual ascent. Running a fixed number of iterations with `tol = 0` gives the
//! unrolled-layer behaviour.

mod prox;

pub use prox::{b_update, dual_update, primal_residual, soft_threshold, x1_update, x2_update_group, x2_update_nuclear};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::TransitionMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularizer {
    /// Nuclear norm (low rank).
    Nuclear,
    /// Sum of column Euclidean norms (group sparsity).
    GroupL12,
}

impl Regularizer {
    pub fn name(self) -> &'static str {
        match self {
            Regularizer::Nuclear => "nuclear",
            Regularizer::GroupL12 => "group",
        }
    }
}

impl std::fmt::Display for Regularizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nuclear" => Ok(Regularizer::Nuclear),
            "group" | "l12" => Ok(Regularizer::GroupL12),
            other => Err(Error::param("regularizer", format!("expected `nuclear` or `group`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadmmConfig<T> {
    pub lambda: T,
    pub alpha: T,
    pub rho: T,
    pub regularizer: Regularizer,
    pub max_iters: usize,
    /// Stop once both primal residuals fall strictly below this value.
    pub tol: T,
    /// Clamp applied to `B0`, `X1`, `X2` before taking logarithms.
    pub floor: T,
}

impl<T: Scalar> Default for BadmmConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::one(),
            alpha: T::lit(0.5),
            rho: T::one(),
            regularizer: Regularizer::Nuclear,
            max_iters: 2,
            tol: T::lit(1e-6),
            floor: T::lit(1e-12),
        }
    }
}

impl<T: Scalar> BadmmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be finite and nonnegative, got {}", self.lambda)));
        }
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(Error::param("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.rho > T::zero()) || !self.rho.is_finite() {
            return Err(Error::param("rho", format!("must be positive, got {}", self.rho)));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be positive"));
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::param("tol", format!("must be nonnegative, got {}", self.tol)));
        }
        if !(self.floor > T::zero()) {
            return Err(Error::param("floor", format!("must be positive, got {}", self.floor)));
        }
        Ok(())
    }
}

/// Iterates of the solver after the last executed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BadmmState<T> {
    /// Row-stochastic structured transition matrix.
    pub b: TransitionMatrix<T>,
    /// Sparse split variable; its exact zeros are the sparse support estimate.
    pub x1: Matrix<T>,
    /// Low-rank / group-sparse split variable.
    pub x2: Matrix<T>,
    pub z1: Matrix<T>,
    pub z2: Matrix<T>,
    /// `(‖B − X1‖_F, ‖B − X2‖_F)` of the last iteration.
    pub primal_residuals: (T, T),
    pub residual_history: Vec<(T, T)>,
    /// Objective value at the final `B`.
    pub objective: T,
    pub iterations: usize,
}

impl<T: Scalar> BadmmState<T> {
    fn initial(b0: &TransitionMatrix<T>) -> Self {
        let n = b0.n();
        Self {
            b: b0.clone(),
            x1: b0.as_matrix().clone(),
            x2: b0.as_matrix().clone(),
            z1: Matrix::zeros(n, n),
            z2: Matrix::zeros(n, n),
            primal_residuals: (T::zero(), T::zero()),
            residual_history: Vec::new(),
            objective: T::zero(),
            iterations: 0,
        }
    }
}

/// `KL(B ‖ B0)` on the lower-triangular support with `0·log 0 = 0`; entries of
/// `B0` are clamped at `floor`.
pub fn kl_divergence<T: Scalar>(b: &TransitionMatrix<T>, b0: &TransitionMatrix<T>, floor: T) -> T {
    let mut acc = T::zero();
    for i in 0..b.n() {
        for (&p, &q) in b.support_row(i).iter().zip(b0.support_row(i)) {
            if p > T::zero() {
                acc = acc + p * (p / q.max(floor)).ln();
            }
        }
    }
    acc
}

/// Structural regularizer `R(B)`.
pub fn regularizer_value<T: Scalar>(m: &Matrix<T>, regularizer: Regularizer) -> Result<T> {
    Ok(match regularizer {
        Regularizer::Nuclear => T::singular_values(m)?.into_iter().sum(),
        Regularizer::GroupL12 => (0..m.cols())
            .map(|j| (0..m.rows()).map(|i| m[(i, j)] * m[(i, j)]).sum::<T>().sqrt())
            .sum(),
    })
}

/// `KL(B‖B0) + λ(α‖B‖₁ + (1−α)R(B))`.
///
/// For row-stochastic `B` the ℓ1 term always equals `N`; it is kept so the
/// value matches the stated problem.
pub fn objective<T: Scalar>(b: &TransitionMatrix<T>, b0: &TransitionMatrix<T>, cfg: &BadmmConfig<T>) -> Result<T> {
    if b.n() != b0.n() {
        return Err(Error::shape("objective", b0.n(), b.n()));
    }
    let kl = kl_divergence(b, b0, cfg.floor);
    if cfg.lambda == T::zero() {
        return Ok(kl);
    }
    let l1: T = b.as_matrix().as_slice().iter().map(|x| x.abs()).sum();
    let reg = regularizer_value(b.as_matrix(), cfg.regularizer)?;
    Ok(kl + cfg.lambda * (cfg.alpha * l1 + (T::one() - cfg.alpha) * reg))
}

/// Runs the Bregman ADMM loop from `B = X1 = X2 = B0`, `Z1 = Z2 = 0`.
///
/// Each iteration performs the B-update, the X1 and X2 proximal steps and the
/// dual updates, in that order. The loop stops after `max_iters` iterations or
/// as soon as both primal residuals are below `tol`.
pub fn structure_matrix<T: Scalar>(b0: &TransitionMatrix<T>, cfg: &BadmmConfig<T>) -> Result<BadmmState<T>> {
    cfg.validate()?;
    let mut st = BadmmState::initial(b0);
    for _ in 0..cfg.max_iters {
        let b = b_update(b0, &st.x1, &st.x2, &st.z1, &st.z2, cfg.rho, cfg.floor);
        let x1 = x1_update(&b, &st.z1, cfg.lambda, cfg.alpha, cfg.rho);
        let x2 = match cfg.regularizer {
            Regularizer::Nuclear => x2_update_nuclear(&b, &st.z2, cfg.lambda, cfg.alpha, cfg.rho)?,
            Regularizer::GroupL12 => x2_update_group(&b, &st.z2, cfg.lambda, cfg.alpha, cfg.rho),
        };
        let residuals = (primal_residual(&b, &x1), primal_residual(&b, &x2));
        st.z1 = dual_update(&st.z1, &b, &x1);
        st.z2 = dual_update(&st.z2, &b, &x2);
        st.b = b;
        st.x1 = x1;
        st.x2 = x2;
        st.primal_residuals = residuals;
        st.residual_history.push(residuals);
        st.iterations += 1;
        if residuals.0.max(residuals.1) < cfg.tol {
            break;
        }
    }
    st.objective = objective(&st.b, b0, cfg)?;
    Ok(st)
}
