//! Rough-path lifts of multidimensional fractional Brownian motion by
//! Fourier normal ordering.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] holds the model parameters, frequency grids, seeded spectral
//!   noise and the deterministic quadrature every other module builds on.
//! * [`fbm`] samples the smoothed process `B^ε` and evaluates its covariance.
//! * [`levy`] implements the second-order kernels, the cut Fourier domain,
//!   the regularized Lévy area with its counterterm, and the variance
//!   quadratures used for Hölder-exponent and divergence measurements.
//! * [`tree`] is the decorated-rooted-tree combinatorics: admissible cuts,
//!   tree iterated integrals of smooth paths, and the Fubini expansion of
//!   order-3 iterated integrals into signed forests.
//! * [`order3`] carries the skeleton kernels, the per-tree cut domains and
//!   the assembly of regularized third-order integrals.
//! * [`scaling`] fits power laws in log-log coordinates.
//!
//! The crate is `no_std` (with `alloc`) when built without default features.
//! The `parallel` feature evaluates quadrature rows on the rayon pool; the
//! reduction order is fixed so results are bit-identical to a serial run.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod fbm;
pub mod levy;
pub mod order3;
pub mod scaling;
pub mod special;
pub mod spectral;
pub mod tree;

pub use error::{Error, Result};
pub use num_complex::Complex64;
