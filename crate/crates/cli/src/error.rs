use std::fmt;

use lfwave::Error as CoreError;

/// Stable identifiers for every way a run can be refused or fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    ConfigSyntax,
    SchemaVersion,
    CompositeP,
    InvalidField,
    ReducibleModulus,
    NegativeWindow,
    InvalidWindow,
    ExponentWindow,
    ElementSyntax,
    GridExactness,
    InvalidSystem,
    PartitionOverlap,
    Partition,
    LabelMismatch,
    UnknownCheck,
    CheckCombination,
    MissingFile,
    InvalidArgument,
    AxisPath,
    CapExceeded,
    FileParse,
    Io,
    Precondition,
    Degenerate,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::ConfigSyntax => "config-syntax",
            ErrorCode::SchemaVersion => "schema-version",
            ErrorCode::CompositeP => "composite-p",
            ErrorCode::InvalidField => "invalid-field",
            ErrorCode::ReducibleModulus => "reducible-modulus",
            ErrorCode::NegativeWindow => "negative-window",
            ErrorCode::InvalidWindow => "invalid-window",
            ErrorCode::ExponentWindow => "exponent-window",
            ErrorCode::ElementSyntax => "element-syntax",
            ErrorCode::GridExactness => "grid-exactness",
            ErrorCode::InvalidSystem => "invalid-system",
            ErrorCode::PartitionOverlap => "partition-overlap",
            ErrorCode::Partition => "partition",
            ErrorCode::LabelMismatch => "label-mismatch",
            ErrorCode::UnknownCheck => "unknown-check",
            ErrorCode::CheckCombination => "check-combination",
            ErrorCode::MissingFile => "missing-file",
            ErrorCode::InvalidArgument => "invalid-argument",
            ErrorCode::AxisPath => "axis-path",
            ErrorCode::CapExceeded => "cap-exceeded",
            ErrorCode::FileParse => "file-parse",
            ErrorCode::Io => "io",
            ErrorCode::Precondition => "precondition",
            ErrorCode::Degenerate => "degenerate",
        }
    }

    /// 3 for numerical precondition failures, 2 for everything else.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Precondition | ErrorCode::Degenerate => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct RunError {
    pub code: ErrorCode,
    /// config path of the offending field, if any
    pub path: Option<String>,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "error[{}] {}: {}", self.code, p, self.message),
            None => write!(f, "error[{}] {}", self.code, self.message),
        }
    }
}

impl RunError {
    pub fn new(code: ErrorCode, path: impl Into<Option<String>>, message: impl Into<String>) -> Self {
        Self { code, path: path.into(), message: message.into() }
    }

    pub fn at(code: ErrorCode, path: &str, message: impl Into<String>) -> Self {
        Self::new(code, Some(path.to_string()), message)
    }

    pub fn exit_code(&self) -> i32 {
        self.code.exit_code()
    }

    /// Attach a config path to a core error.
    pub fn core(path: &str, e: CoreError) -> Self {
        let mut r = Self::from(e);
        r.path = Some(path.to_string());
        r
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::NotPrime(_) => ErrorCode::CompositeP,
            CoreError::InvalidField(_) => ErrorCode::InvalidField,
            CoreError::ReducibleModulus(_) => ErrorCode::ReducibleModulus,
            CoreError::Window { .. } => ErrorCode::ExponentWindow,
            CoreError::InvalidWindow(_) => ErrorCode::InvalidWindow,
            CoreError::GridExactness { .. } => ErrorCode::GridExactness,
            CoreError::Partition(m) if m.contains("overlap") => ErrorCode::PartitionOverlap,
            CoreError::Partition(_) => ErrorCode::Partition,
            CoreError::LabelMismatch(_) => ErrorCode::LabelMismatch,
            CoreError::Parse { .. } => ErrorCode::FileParse,
            CoreError::Io(_) => ErrorCode::Io,
            CoreError::Precondition(_) => ErrorCode::Precondition,
            CoreError::Degenerate(_) => ErrorCode::Degenerate,
            CoreError::FieldMismatch | CoreError::WindowMismatch | CoreError::InvalidArgument(_) => {
                ErrorCode::InvalidArgument
            }
        };
        Self::new(code, None, e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::new(ErrorCode::Io, None, e.to_string())
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;
