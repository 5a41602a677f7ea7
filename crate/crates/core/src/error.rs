use alloc::boxed::Box;

use crate::sim::Trajectory;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A Kronecker product, power or assembled system would exceed the size guard.
    #[error("assembly limit exceeded: {rows}x{cols} exceeds index space of {limit}")]
    AssemblyLimitExceeded { rows: u128, cols: u128, limit: u64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquareMatrix { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("equation {equation} has a constant term, but the origin must be an equilibrium")]
    DegreeZeroTerm { equation: usize },

    #[error("equation {equation}: monomial has {found} exponents, system dimension is {expected}")]
    ExponentLengthMismatch {
        equation: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid system: {0}")]
    InvalidSystem(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("operation requires a quadratic system, got degree {degree}")]
    NotQuadratic { degree: usize },

    #[error("the first error bound needs an a-priori bound alpha on the solution")]
    MissingAlpha,

    #[error("t = {t} lies beyond the validity horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    /// Integration stopped because the state left the overflow threshold.
    /// Carries everything integrated up to the last finite state.
    #[error("solution blew up at t = {time}")]
    BlowUp {
        time: f64,
        trajectory: Box<Trajectory>,
    },
}
