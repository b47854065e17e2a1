use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Normalized exponential triggering kernel `κ(t) = β·exp(−β·t)`.
///
/// The kernel integrates to one over `[0, ∞)`, so the spectral radius of the
/// infectivity matrix is the branching ratio of the process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpKernel<T> {
    beta: T,
}

impl<T: Scalar> ExpKernel<T> {
    pub fn new(beta: T) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::param("beta", format!("decay rate must be positive and finite, got {beta}")));
        }
        Ok(Self { beta })
    }

    #[inline]
    pub fn beta(&self) -> T {
        self.beta
    }

    /// `κ(dt)`; rejects negative lags.
    pub fn eval(&self, dt: T) -> Result<T> {
        if dt < T::zero() {
            return Err(Error::NegativeArgument { what: "kernel lag", value: dt.as_f64() });
        }
        Ok(self.density(dt))
    }

    /// `∫₀ˣ κ(s) ds = 1 − exp(−β·x)`.
    pub fn integral(&self, x: T) -> Result<T> {
        if x < T::zero() {
            return Err(Error::NegativeArgument { what: "kernel integration bound", value: x.as_f64() });
        }
        Ok(self.mass(x))
    }

    #[inline]
    pub(crate) fn density(&self, dt: T) -> T {
        self.beta * (-self.beta * dt).exp()
    }

    #[inline]
    pub(crate) fn mass(&self, x: T) -> T {
        -(-self.beta * x).exp_m1()
    }

    /// Multiplicative decay of the kernel over a lag: `exp(−β·dt)`.
    #[inline]
    pub(crate) fn decay(&self, dt: T) -> T {
        (-self.beta * dt).exp()
    }
}

impl<T: Scalar> Default for ExpKernel<T> {
    fn default() -> Self {
        Self { beta: T::one() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(beta: f64) -> ExpKernel<f64> {
        ExpKernel::new(beta).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(k(1.0).eval(0.0).unwrap(), 1.0);
        assert!((k(1.0).eval(1.0).unwrap() - 0.36787944).abs() < 1e-8);
        assert!((k(2.0).eval(0.5).unwrap() - 0.73575888).abs() < 1e-8);
    }

    #[test]
    fn integral_examples() {
        assert_eq!(k(1.0).integral(0.0).unwrap(), 0.0);
        assert!((k(1.0).integral(f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        assert!((k(1.0).integral(1e6).unwrap() - 1.0).abs() < 1e-12);
        assert!((k(1.0).integral(1.0).unwrap() - 0.63212056).abs() < 1e-8);
    }

    #[test]
    fn negative_arguments_are_domain_errors() {
        assert!(matches!(k(1.0).eval(-1e-3), Err(Error::NegativeArgument { .. })));
        assert!(matches!(k(1.0).integral(-1.0), Err(Error::NegativeArgument { .. })));
    }

    #[test]
    fn rejects_nonpositive_beta() {
        assert!(ExpKernel::new(0.0f64).is_err());
        assert!(ExpKernel::new(-1.0f64).is_err());
        assert!(ExpKernel::new(f64::NAN).is_err());
    }

    #[test]
    fn eval_is_nonincreasing() {
        let kern = k(1.7);
        let mut prev = kern.eval(0.0).unwrap();
        for i in 1..200 {
            let v = kern.eval(i as f64 * 0.05).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }
}
