//! Adiabatic quantum search of an `N`-item list under decoherence in the
//! instantaneous energy eigenbasis.
//!
//! * [`model`]: spectrum, eigenvectors, couplings and schedules of the
//!   two-level reduction.
//! * [`dynamics`]: Bloch-vector integration of the master equation.
//! * [`oracle`]: brute-force density-matrix simulation on the full space.
//! * [`bounds`]: analytical run-time and deviation bounds.
//! * [`analysis`]: run-time search, `(N, T)` sweeps and slope fits.
//! * [`validation`]: invariant suites shared by tests and the CLI.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod validation;

pub use error::{Error, Result};
