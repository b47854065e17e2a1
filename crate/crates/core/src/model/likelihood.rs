//! Conditional intensity and exact log-likelihood of a Hawkes process with
//! exponential kernel.

use crate::error::{Error, Result};
use crate::model::params::HawkesParams;
use crate::model::sequence::EventSequence;
use crate::scalar::Scalar;

/// `λ_c(t) = μ_c + Σ_{t_n < t} a_{c,c_n} κ(t − t_n)`, evaluated by direct summation.
pub fn intensity<T: Scalar>(params: &HawkesParams<T>, seq: &EventSequence<T>, c: usize, t: T) -> Result<T> {
    let num_types = params.num_types();
    if c >= num_types {
        return Err(Error::TypeOutOfRange { index: c, num_types });
    }
    if t < T::zero() {
        return Err(Error::NegativeArgument { what: "query time", value: t.as_f64() });
    }
    let kernel = params.kernel();
    let mut excitation = T::zero();
    for e in seq.events().iter().take_while(|e| e.t < t) {
        if e.c >= num_types {
            return Err(Error::TypeOutOfRange { index: e.c, num_types });
        }
        excitation = excitation + params.a(c, e.c) * kernel.density(t - e.t);
    }
    Ok(params.mu()[c] + excitation)
}

/// Incremental evaluation of all intensities along a sequence.
///
/// Keeps, per source type, `Σ exp(−β(t − t_n))` over past events of that type,
/// so each step costs `O(C²)` instead of `O(N·C)`.
#[derive(Debug, Clone)]
pub(crate) struct IntensityTracker<'a, T> {
    params: &'a HawkesParams<T>,
    decayed: Vec<T>,
    now: T,
}

impl<'a, T: Scalar> IntensityTracker<'a, T> {
    pub(crate) fn new(params: &'a HawkesParams<T>) -> Self {
        Self { params, decayed: vec![T::zero(); params.num_types()], now: T::zero() }
    }

    /// Moves the clock forward; `t` must not precede the current time.
    pub(crate) fn advance_to(&mut self, t: T) {
        debug_assert!(t >= self.now);
        let f = self.params.kernel().decay(t - self.now);
        for s in &mut self.decayed {
            *s = *s * f;
        }
        self.now = t;
    }

    /// Intensity of type `c` at the current time, history strictly before now.
    pub(crate) fn intensity(&self, c: usize) -> T {
        let beta = self.params.kernel().beta();
        let exc: T = self.params.infectivity().row(c).iter().zip(&self.decayed).map(|(&a, &s)| a * s).sum();
        self.params.mu()[c] + beta * exc
    }

    pub(crate) fn intensities(&self, out: &mut [T]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.intensity(c);
        }
    }

    /// Registers an event of type `c` at the current time.
    pub(crate) fn record(&mut self, c: usize) {
        self.decayed[c] = self.decayed[c] + T::one();
    }
}

/// `Σ_c ∫₀ᵀ λ_c(s) ds` in closed form.
pub fn compensator<T: Scalar>(params: &HawkesParams<T>, seq: &EventSequence<T>) -> T {
    let horizon = seq.horizon();
    let kernel = params.kernel();
    let base: T = params.mu().iter().copied().sum::<T>() * horizon;
    let col_sums: Vec<T> = (0..params.num_types())
        .map(|src| (0..params.num_types()).map(|c| params.a(c, src)).sum())
        .collect();
    let triggered: T = seq.events().iter().map(|e| col_sums[e.c] * kernel.mass(horizon - e.t)).sum();
    base + triggered
}

/// Exact log-likelihood `Σ_n log λ_{c_n}(t_n) − Σ_c ∫₀ᵀ λ_c(s) ds`.
///
/// A nonpositive intensity at an observed event is reported as
/// [`Error::ZeroIntensity`] rather than returning `−∞`.
pub fn log_likelihood<T: Scalar>(params: &HawkesParams<T>, seq: &EventSequence<T>) -> Result<T> {
    seq.check_types(params.num_types())?;
    let mut tracker = IntensityTracker::new(params);
    let mut log_sum = T::zero();
    for (n, e) in seq.events().iter().enumerate() {
        tracker.advance_to(e.t);
        let lambda = tracker.intensity(e.c);
        if !(lambda > T::zero()) {
            return Err(Error::ZeroIntensity { sequence: seq.id().to_owned(), event: n });
        }
        log_sum = log_sum + lambda.ln();
        tracker.record(e.c);
    }
    Ok(log_sum - compensator(params, seq))
}
