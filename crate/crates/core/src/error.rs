use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("evaluation at omega = {omega} rad/s is too close to a pole")]
    PoleProximity { omega: f64 },

    #[error("pole at {re} + {im}j lies on the imaginary axis inside the band")]
    PoleInBand { re: f64, im: f64 },

    #[error("ill-posed loop: 1 + H*G is identically zero")]
    IllPosedLoop,

    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    Improper { num: usize, den: usize },

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{0} is out of range")]
    Range(String),

    #[error("parameter vector has length {got}, expected {expected}")]
    Shape { expected: usize, got: usize },

    #[error("bound {item}: {source}")]
    Item {
        item: String,
        #[source]
        source: Box<Error>,
    },

    #[error("no stabilizing parameters found (best spectral abscissa {best_abscissa})")]
    NoStabilizer { best_abscissa: f64 },

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    #[error("closed loop is unstable")]
    Unstable,

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
