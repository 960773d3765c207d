use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building states, parsing them or
/// evaluating entanglement measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has zero norm")]
    ZeroState,

    #[error("state contains non-finite amplitudes")]
    NonFinite,

    #[error("invalid system shape: {0}")]
    InvalidShape(String),

    #[error("size limit exceeded: {what} is {actual}, limit is {limit}")]
    SizeLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("invalid tolerances: {0}")]
    InvalidTolerance(String),

    #[error("party subset is empty")]
    EmptySubset,

    #[error("party subset must be neither empty nor the full party set")]
    TrivialSubset,

    #[error("party index {index} out of range for {parties} parties")]
    PartyOutOfRange { index: usize, parties: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("hermitian eigenvalue computation did not converge (dimension {0})")]
    EigenFailure(usize),

    #[error("density matrix has eigenvalue {0:e}, below the allowed negative margin")]
    NegativeEigenvalue(f64),

    #[error("subset {subset} is not separable from the rest (rank {rank})")]
    NotSeparable { subset: String, rank: usize },

    #[error(
        "separability of subset {subset} is tolerance-sensitive: eigenvalue {eigenvalue:e} \
         is within a factor of 10 of the rank threshold {threshold:e}"
    )]
    NumericalAmbiguity {
        subset: String,
        eigenvalue: f64,
        threshold: f64,
    },

    #[error("state norm {norm} deviates from 1 by more than {eps:e}")]
    NotNormalized { norm: f64, eps: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Errors from the ket-expression and amplitude-table readers. Positions are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error, expected {}", .expected.join(" or "))]
    Syntax {
        line: usize,
        column: usize,
        expected: Vec<String>,
    },

    #[error("{line}:{column}: cannot combine kets of {left} and {right} parties")]
    ArityMismatch {
        line: usize,
        column: usize,
        left: usize,
        right: usize,
    },

    #[error("{line}:{column}: {message}")]
    Invalid {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: bad header: {message}")]
    BadHeader { line: usize, message: String },

    #[error("line {line}: index {index} out of range for party {party} of dimension {dim}")]
    IndexOutOfRange {
        line: usize,
        party: usize,
        index: usize,
        dim: usize,
    },

    #[error("line {line}: duplicate entry (first given on line {first})")]
    DuplicateEntry { line: usize, first: usize },
}
