use thiserror::Error;

use crate::pursuit::PursuitState;

/// Errors raised by construction and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spline order {0}: order must be at least 1")]
    InvalidOrder(usize),

    #[error("degenerate knot window: all {0} knots coincide")]
    DegenerateKnots(usize),

    #[error("knot window must be non-decreasing")]
    UnsortedKnots,

    #[error("incompatible spacing: ({len})/{spacing} is not an integer")]
    IncompatibleSpacing { len: f64, spacing: f64 },

    #[error("invalid interval [{c}, {d}]")]
    InvalidInterval { c: f64, d: f64 },

    #[error("spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),

    #[error("interval of length {len} cannot hold a complete B-spline of order {m} with spacing {b}")]
    IntervalTooShort { len: f64, m: usize, b: f64 },

    #[error("invalid shift {r}: must satisfy 0 < r < {min_gap}")]
    InvalidShift { r: f64, min_gap: f64 },

    #[error("incompatible refinement: b/b' = {b}/{b_prime} is not an integer >= 1")]
    IncompatibleRefinement { b: f64, b_prime: f64 },

    #[error("singular pivot h[{fine}, {coarse}] = {value:e}")]
    SingularPivot { fine: i64, coarse: i64, value: f64 },

    #[error("fine index {0} is outside the fine shift grid")]
    FineIndexOutOfRange(i64),

    #[error("expected {expected} nonzero frame eigenvalues, found {found}")]
    RankDeficient { expected: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("too many blocks: {n_blocks} blocks need {needed} breakpoints, grid offers {available}")]
    TooManyBlocks { n_blocks: usize, needed: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pursuit stagnated at relative error {relerr:e} after {} atoms", state.selected.len())]
    Stagnation { relerr: f64, state: Box<PursuitState> },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
