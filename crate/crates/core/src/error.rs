use thiserror::Error;

use crate::fockspace::Label;
use crate::modes::Mode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no propagator data for mode {0}")]
    MissingPropagator(Mode),

    #[error("admissibility violated: {0}")]
    AdmissibilityViolation(String),

    #[error("propagator value at mode {mode}, 2j={two_j} is zero; per-mode measure parameter undefined")]
    NonpositivePropagator { mode: Mode, two_j: i32 },

    #[error("label {0} is not part of the Fock context")]
    UnknownLabel(Label),

    #[error("requested mode {mode} exceeds the grid band limit (|n| <= {n_max}, 2l <= {two_l_max})")]
    BandLimitExceeded { mode: Mode, n_max: i32, two_l_max: u32 },

    #[error("brute-force enumeration limited to n <= {limit}, got {n}")]
    SizeLimit { n: usize, limit: usize },

    #[error("quadrature grid too small: {0}")]
    GridTooSmall(String),

    #[error("quadrature ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("reality condition violated: {0}")]
    Reality(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
