//! Domain types of the point-process model: events, sequences, the kernel,
//! Hawkes parameters, transition matrices and the likelihood.

mod kernel;
mod likelihood;
mod params;
mod sequence;
mod transition;

pub use kernel::ExpKernel;
pub(crate) use likelihood::IntensityTracker;
pub use likelihood::{compensator, intensity, log_likelihood};
pub use params::HawkesParams;
pub use sequence::{Dataset, Event, EventSequence};
pub use transition::TransitionMatrix;
