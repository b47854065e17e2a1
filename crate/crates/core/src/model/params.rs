use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::kernel::ExpKernel;
use crate::scalar::Scalar;

/// Parameters of a multivariate Hawkes process with exponential kernel.
///
/// `infectivity[(c, c2)]` is the expected number of type-`c` children spawned
/// by a single type-`c2` event.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesParams<T> {
    mu: Vec<T>,
    infectivity: Matrix<T>,
    kernel: ExpKernel<T>,
}

impl<T: Scalar> HawkesParams<T> {
    pub fn new(mu: Vec<T>, infectivity: Matrix<T>, kernel: ExpKernel<T>) -> Result<Self> {
        let c = mu.len();
        if c == 0 {
            return Err(Error::param("mu", "at least one event type is required"));
        }
        if infectivity.shape() != (c, c) {
            return Err(Error::shape("infectivity", format!("{c}x{c}"), format!("{:?}", infectivity.shape())));
        }
        if let Some(m) = mu.iter().find(|m| !(**m >= T::zero()) || !m.is_finite()) {
            return Err(Error::param("mu", format!("entries must be finite and nonnegative, got {m}")));
        }
        if let Some(a) = infectivity.as_slice().iter().find(|a| !(**a >= T::zero()) || !a.is_finite()) {
            return Err(Error::param("infectivity", format!("entries must be finite and nonnegative, got {a}")));
        }
        Ok(Self { mu, infectivity, kernel })
    }

    pub fn num_types(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn infectivity(&self) -> &Matrix<T> {
        &self.infectivity
    }

    #[inline]
    pub fn a(&self, c: usize, c_src: usize) -> T {
        self.infectivity[(c, c_src)]
    }

    pub fn kernel(&self) -> &ExpKernel<T> {
        &self.kernel
    }

    pub fn with_kernel(&self, kernel: ExpKernel<T>) -> Self {
        Self { kernel, ..self.clone() }
    }

    pub fn cast<U: Scalar>(&self) -> HawkesParams<U> {
        HawkesParams {
            mu: self.mu.iter().map(|&m| U::lit(m.as_f64())).collect(),
            infectivity: self.infectivity.cast(),
            kernel: ExpKernel::new(U::lit(self.kernel.beta().as_f64())).expect("beta stays positive"),
        }
    }
}
