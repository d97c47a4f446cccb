//! High-precision laboratory for the volume of regular spherical
//! 3-simplices and experimental rationality testing of the associated
//! integral function.
//!
//! Modules:
//! - [`hiprec`] - arbitrary-precision reals and tanh-sinh quadrature
//! - [`simplex`] - the one-parameter regular family: edge/face-angle/dihedral
//!   conversions and explicit vertices in 4-space
//! - [`volume`] - the volume of the family by independent routes, plus the
//!   normalized integral `f(t)` and a Monte Carlo oracle
//! - [`ratlab`] - continued fractions, rational reconstruction, verdicts
//! - [`orbit`] - facet-reflection orbit exploration on the 3-sphere
//! - [`cli`] - command-line front end with a persistent result cache

pub mod cli;
pub mod error;
pub mod hiprec;
pub mod orbit;
pub mod ratlab;
pub mod simplex;
pub mod volume;

pub use error::{Error, Result};
