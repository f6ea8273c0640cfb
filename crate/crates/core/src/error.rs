use thiserror::Error;

/// Errors raised by series arithmetic, division, the solvers and the text front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("no certified coefficients left: {0}")]
    TruncationExhausted(String),

    #[error("degree {degree} exceeds truncation order {trunc}")]
    DegreeAboveTruncation { degree: u32, trunc: u32 },

    #[error("substitution component {0} has a nonzero constant term")]
    NonzeroConstantTerm(usize),

    #[error("series is zero on all certified degrees")]
    ZeroSeries,

    #[error("series is not a unit (zero constant term)")]
    NotAUnit,

    #[error("divisor must vanish at the origin")]
    DivisorNotInMaximalIdeal,

    #[error("weight vector must be positive and of length {0}")]
    InvalidLinearForm(usize),

    #[error("iteration did not stabilize within {0} passes")]
    NoConvergence(usize),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mismatched divisor or linear form between decompositions")]
    MismatchedDecomposition,

    #[error("hypothesis refused: {0}")]
    Refusal(String),

    #[error("resonance at n = {n}: det(mu - n L(P)(0) I) = 0")]
    Resonance { n: usize },

    #[error("singular linear system at degree {degree}")]
    SingularDegree { degree: u32 },

    #[error("residual check failed: residual of order {order} does not exceed certified order {certified}")]
    ResidualCheck { order: u32, certified: u32 },

    #[error("too few nonzero entries ({found}) for a fit, need {needed}")]
    TooFewEntries { found: usize, needed: usize },

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
