use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    #[error("modulus {0} is reducible over GF(p)")]
    ReducibleModulus(String),

    #[error("operands belong to different fields")]
    FieldMismatch,

    /// Arithmetic produced a nonzero coefficient outside the configured exponent window.
    #[error("exponent window [{lo}, {hi}] exceeded: result needs exponents [{need_lo}, {need_hi}]")]
    Window {
        lo: i32,
        hi: i32,
        need_lo: i32,
        need_hi: i32,
    },

    #[error("invalid model window: {0}")]
    InvalidWindow(String),

    #[error("{element} is not representable on the grid of window (M={m}, N={n})")]
    GridExactness { element: String, m: u32, n: u32 },

    #[error("functions live on different windows")]
    WindowMismatch,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}
