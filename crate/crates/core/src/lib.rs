//! Simulation and measurement-analysis library for kinetic-inductance
//! traveling-wave parametric amplifiers (TWPAs).
//!
//! The library covers the full desk-scale chain for a DC-biased
//! three-wave-mixing TWPA:
//!
//! * [`device`] — per-unit-length line constants and the current-dependent
//!   kinetic inductance of the nonlinear transmission line.
//! * [`dispersion`] — Floquet/Bloch dispersion of the stub-loaded,
//!   periodically modulated line, bandgap detection, and the three-wave
//!   phase-mismatch function.
//! * [`cme`] — coupled-mode propagation of pump, signal, and idler with
//!   pump depletion, gain spectra, degenerate quadrature gains,
//!   compression curves, and a parametric-oscillation criterion.
//! * [`noise`] — quanta conversion, the phase-insensitive quantum limit,
//!   cascaded-amplifier system noise, squeezed-quadrature output noise,
//!   and its inversion.
//! * [`pipeline`] — spectrum-analyzer trace synthesis with realistic
//!   systematics, y-factor calibration, added-noise extraction,
//!   noise-model fitting, and squeezing analysis.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops walk several parallel per-frequency vectors.
#![allow(clippy::needless_range_loop)]

pub mod cme;
pub mod constants;
pub mod device;
pub mod dispersion;
pub mod error;
pub mod noise;
pub mod pipeline;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
