use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("parity violation: {0}")]
    ParityViolation(String),
    #[error("formal unit 1nu added to a nonzero ring element: {0}")]
    FormalUnitSum(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("elimination stalled on a nonsingular reduced matrix: {0}")]
    EliminationStalled(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),
    #[error("multi-index is not balanced: {0}")]
    BadIndexBalance(String),
    #[error("kernel not trivial: {0}")]
    KernelNotTrivial(String),
    #[error("invalid involution: {0}")]
    InvalidInvolution(String),
    #[error("generator count: {0}")]
    GeneratorCount(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier {0}")]
    UnknownIdentifier(String),
    #[error("division by non-invertible expression: {0}")]
    DivisionByNonInvertible(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ContextMismatch(_) => "ContextMismatch",
            Error::NotInvertible(_) => "NotInvertible",
            Error::ParityViolation(_) => "ParityViolation",
            Error::FormalUnitSum(_) => "FormalUnitSum",
            Error::Singular(_) => "Singular",
            Error::EliminationStalled(_) => "EliminationStalled",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::OutOfRange(_) => "OutOfRange",
            Error::InvalidIndex(_) => "InvalidIndex",
            Error::BadIndexBalance(_) => "BadIndexBalance",
            Error::KernelNotTrivial(_) => "KernelNotTrivial",
            Error::InvalidInvolution(_) => "InvalidInvolution",
            Error::GeneratorCount(_) => "GeneratorCount",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownIdentifier(_) => "UnknownIdentifier",
            Error::DivisionByNonInvertible(_) => "DivisionByNonInvertible",
            Error::Schema(_) => "SchemaError",
            Error::Precondition(_) => "PreconditionFailed",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
