//! Finite-truncation numerics for the white-noise construction of the
//! Feynman integral on `[R mod 4π] × SU(2)`.
//!
//! Every closed-form identity in the construction is paired here with an
//! independent route (brute force, an explicit operator matrix, or a
//! quadrature) so that the two can be compared at desk scale.

pub mod chrono;
pub mod error;
pub mod fixture;
pub mod fockspace;
pub mod harmonics;
pub mod linalg;
pub mod measure;
pub mod modes;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod symbolcalc;

pub use error::{Error, Result};
pub use modes::{CoefficientField, Mode, PropagatorSpec};
