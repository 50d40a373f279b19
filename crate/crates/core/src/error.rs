use thiserror::Error;

/// Errors raised by the algebra engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("scalar {0} is not a root of unity")]
    NotARootOfUnity(String),

    #[error("bicharacter is ill-defined at entry ({i}, {j}): {reason}")]
    IllDefinedBicharacter { i: usize, j: usize, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operation requires a finite group but the free rank is {0}")]
    InfiniteGroup(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{family} is not a {zeta}-family")]
    NotAZetaFamily { zeta: String, family: String },

    #[error("{zeta} is not a primitive {n}-th root of unity")]
    NotPrimitiveRoot { zeta: String, n: usize },

    #[error("pair (h, g_{index}) is not a (-1)-family")]
    PairNotMinusOneFamily { index: usize },

    #[error("argument {index} has degree {found}, expected {expected}")]
    DegreeMismatch { index: usize, expected: String, found: String },

    #[error("generator tables differ")]
    TableMismatch,

    #[error("word {0} is not homogeneous")]
    InhomogeneousWord(String),

    #[error("relation {0} is not G-homogeneous")]
    InhomogeneousRelation(String),

    #[error("cannot orient relation {0}")]
    OrientationFailure(String),

    #[error("degree bound {bound} is below the longest relation word ({needed})")]
    DegreeBoundTooSmall { bound: usize, needed: usize },

    #[error("word {0} exceeds the completion degree bound")]
    DegreeOverflow(String),

    #[error("rewrite system did not stabilize below the degree bound")]
    IncompleteRewriteSystem,

    #[error("algebra is not finite-dimensional below the degree bound")]
    InfiniteDimensional,

    #[error("bracket for the {zeta}-family {family} is not declared")]
    MissingBracket { zeta: String, family: String },

    #[error("Lie presentation fails validation: {0}")]
    LieValidationFailure(String),

    #[error("convolution inverse of the identity does not exist")]
    AntipodeNotFound,

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(col: usize, message: impl Into<String>) -> Self {
        Error::Parse { line: 1, col, message: message.into() }
    }
}
