use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { message: String, position: usize },

    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("unknown variable `{name}` at byte {position} (chart has {dims} parameter(s))")]
    UnknownVariable {
        name: String,
        position: usize,
        dims: usize,
    },

    #[error("`{name}` takes {expected} argument(s), found {found} (at byte {position})")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        position: usize,
    },

    #[error("division by zero in subexpression at byte {position}")]
    DivisionByZero { position: usize },

    #[error("square root of a negative number in subexpression at byte {position}")]
    SqrtOfNegative { position: usize },

    #[error("point {point:?} is outside the chart domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("degenerate sphere: center coincides with the surface point")]
    DegenerateSphere,

    #[error("invalid parametrization: {0}")]
    InvalidParametrization(String),

    #[error("invalid example spec: {0}")]
    InvalidSpec(String),

    #[error("degenerate cluster: needs rank {needed}, achieved {achieved}")]
    DegenerateCluster { needed: usize, achieved: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("manifold file, line {line}: {message}")]
    ManifoldFile { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 for usage and parse problems, 2 for numerical
    /// failures. (Verification violations exit 3 but are not errors.)
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::UnknownVariable { .. }
            | Error::ArityMismatch { .. }
            | Error::InvalidParametrization(_)
            | Error::InvalidSpec(_)
            | Error::ManifoldFile { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::DivisionByZero { .. }
            | Error::SqrtOfNegative { .. }
            | Error::OutOfDomain { .. }
            | Error::DegenerateSphere
            | Error::DegenerateCluster { .. }
            | Error::NumericalFailure(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
