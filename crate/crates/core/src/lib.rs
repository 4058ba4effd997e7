//! Skein-theoretic invariant of extended welded links.
//!
//! * [`algebra`]: exact polynomial and fraction arithmetic.
//! * [`diagram`]: diagrams, tangles, statistics and the text format.
//! * [`skein`]: the state sum and the normalized invariant.
//! * [`moves`]: local rewrites and a seeded scrambler.
//! * [`verifier`]: tangle closures and coefficient constraints.

pub mod algebra;
pub mod diagram;
pub mod moves;
pub mod skein;
pub mod verifier;
