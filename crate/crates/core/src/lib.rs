//! Sampling MaxCut solutions from two-layer QAOA circuits split into two
//! fragments by wire cutting.
//!
//! The pipeline runs separator search, separator shrinking, QAOA training,
//! fragment construction with two single-wire quasi-probability cuts,
//! signed sampling and histogram analysis. Objective arithmetic is generic
//! over [`Weight`] and simulation over [`Real`]; the aliases below fix the
//! usual choices.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod generate;
pub mod optimize;
pub mod graph;
pub mod scalar;
pub mod separator;
pub mod rng;
pub mod shrink;
pub mod qaoa;
pub mod sim;
pub mod wirecut;

pub use error::{Error, Result};
pub use graph::{Bits, MaxCutInstance};
pub use scalar::{Real, Weight};

/// Instance with exact rational weights.
pub type ExactInstance = MaxCutInstance<num_rational::Rational64>;
/// Instance with floating-point weights.
pub type FloatInstance = MaxCutInstance<f64>;
/// Exact rational scalar.
pub type Rational = num_rational::Rational64;
