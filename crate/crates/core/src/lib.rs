//! Simulation and analysis of the coined quantum walk on the line with
//! extended initial conditions.
//!
//! The crate is organised bottom-up:
//!
//! * [`walk`] holds the lattice state and the exact one-step unitary map.
//! * [`spectral`] holds the dispersion relation, the eigenspinors and the
//!   closed-form propagator built on a discrete Fourier transform.
//! * [`continuum`] propagates slowly varying envelopes with truncated (or
//!   exact) dispersion and provides the analytic Gaussian, flat-top and
//!   Talbot predictions.
//! * [`initcond`] builds extended initial states from envelope families.
//! * [`analysis`] measures moments, parity gaps, packet velocities and
//!   plateau flatness.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analysis;
pub mod angle;
pub mod continuum;
mod error;
mod fft;
pub mod initcond;
pub mod spectral;
pub mod tolerance;
pub mod walk;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use analysis::{FlatnessReport, Metric, Moments, PacketFit, PacketTrack};
pub use continuum::{EnvelopeField, FlatTopPrediction, GaussianWidthLaw, Grid, TruncationOrder};
pub use initcond::{CoinChoice, EnvelopeFamily, EnvelopeSpec, InitialConditionSpec};
pub use spectral::{Branch, Eigenspinor, SpectralDecomposition};
pub use walk::{CoinParameter, ProbabilityDistribution, WalkerState};
