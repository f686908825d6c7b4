//! Weighted dyadic harmonic analysis on the half space `ℝ^d_+` and numerical
//! checks of a priori estimates for parabolic and elliptic systems.

pub mod boxes;
pub mod corpus;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod kernel;
pub mod measure;
pub mod problem;
pub mod report;
pub mod sobolev;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};
