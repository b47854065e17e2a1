//! Multivariate Hawkes processes with an exponential kernel: simulation,
//! EM fitting, and Bregman-ADMM structuring of event-branch transition
//! matrices into sparse and low-rank form.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar type.

pub mod badmm;
pub mod em;
pub mod error;
pub mod eval;
pub mod io;
pub mod matrix;
pub mod model;
pub mod scalar;
pub mod simulate;

pub use badmm::{structure_matrix, BadmmConfig, BadmmState, Regularizer};
pub use em::{e_step, fit, m_step, EmConfig, FitResult};
pub use error::{Error, Result};
pub use matrix::{Matrix, Svd};
pub use model::{compensator, intensity, log_likelihood, Dataset, Event, EventSequence, ExpKernel, HawkesParams, TransitionMatrix};
pub use scalar::Scalar;
pub use simulate::{simulate_branching, simulate_dataset, simulate_thinning, BranchLabels, SimConfig, SimMethod};

pub type MatrixF64 = Matrix<f64>;
pub type EventF64 = Event<f64>;
pub type EventSequenceF64 = EventSequence<f64>;
pub type DatasetF64 = Dataset<f64>;
pub type HawkesParamsF64 = HawkesParams<f64>;
pub type TransitionMatrixF64 = TransitionMatrix<f64>;
pub type BadmmConfigF64 = BadmmConfig<f64>;
pub type BadmmStateF64 = BadmmState<f64>;
pub type EmConfigF64 = EmConfig<f64>;
pub type FitResultF64 = FitResult<f64>;

pub type MatrixF32 = Matrix<f32>;
pub type EventF32 = Event<f32>;
pub type EventSequenceF32 = EventSequence<f32>;
pub type DatasetF32 = Dataset<f32>;
pub type HawkesParamsF32 = HawkesParams<f32>;
pub type TransitionMatrixF32 = TransitionMatrix<f32>;
pub type BadmmConfigF32 = BadmmConfig<f32>;
pub type BadmmStateF32 = BadmmState<f32>;
pub type EmConfigF32 = EmConfig<f32>;
pub type FitResultF32 = FitResult<f32>;
