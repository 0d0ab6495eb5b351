//! Decoherence rates of Markovian dephasing processes.
//!
//! The crate covers three families of dephasing channels:
//!
//! * Lindblad channels whose operators are drawn from the Gaussian Unitary
//!   Ensemble ([`ensembles`], [`rates`]),
//! * all-to-all k-body σᶻ channels and the two-body random ensemble
//!   ([`rates`]),
//! * energy dephasing of a thermofield-double state ([`dynamics`],
//!   [`specfun`]), including stochastic unravelings ([`trajectories`]).
//!
//! Everything is dense and desk-scale. Monte-Carlo loops are parallel over
//! sample index with one counter-based RNG stream per index, so results are
//! bit-identical regardless of the worker count.

pub mod commands;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod rates;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod trajectories;
pub mod validate;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityState, HermitianOperator, SpectralData};
pub use rng::RngStream;
pub use stats::EnsembleEstimate;

pub use num_complex::Complex64;
