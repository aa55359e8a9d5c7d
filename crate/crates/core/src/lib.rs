//! Breakdown thresholds of invariant circles of the standard map.
//!
//! The library computes, at arbitrary precision:
//!
//! * the critical function `eps_c(omega)` of the standard map via Greene's
//!   residue criterion (periodic-orbit continuation, residues, bisection),
//! * the radius of convergence `rho(omega)` of the Lindstedt series via
//!   Pade approximants and via a heuristic resonance formula,
//! * the Bryuno function `B(omega)` for eventually periodic continued
//!   fractions, and
//! * scaling fits of `log eps_c` and `log rho` against `B(omega)`.
//!
//! Everything is deterministic: the same inputs at the same working
//! precision produce bit-identical results, which is what makes the
//! on-disk cache in [`cache`] safe to reuse across runs.

pub mod cache;
pub mod dynamics;
pub mod greene;
pub mod jobs;
pub mod lindstedt;
pub mod numerics;
pub mod orbits;
pub mod pade;
pub mod reference;
pub mod reproduce;
pub mod rotation;
pub mod scaling;

pub use numerics::{BigReal, PrecisionContext};
pub use rotation::ContinuedFraction;
