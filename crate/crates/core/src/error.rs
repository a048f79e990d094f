use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("window of {window} samples does not fit a signal of {len} samples")]
    EmptyWindow { window: usize, len: usize },

    #[error("invalid window spec: {0}")]
    InvalidWindow(String),

    #[error("cannot split a sequence of length {0}")]
    CannotSplit(usize),

    #[error("prediction has no support: the even grid is empty")]
    NoSupport,

    #[error("signal of length {len} is too short for {needed} samples")]
    InsufficientLength { len: usize, needed: usize },

    #[error("corrupt decomposition: {0}")]
    CorruptDecomposition(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no data")]
    NoData,

    #[error("invalid threshold {0}")]
    InvalidThreshold(f64),

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("window of {len} samples is too short, need at least {needed}")]
    WindowTooShort { len: usize, needed: usize },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("cross-validation infeasible: {0}")]
    CvInfeasible(String),

    #[error("width mismatch: expected {expected} features, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("non-finite feature value")]
    NonFiniteFeature,

    #[error("label `{0}` is not part of the class order")]
    UnknownLabel(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short identifier, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSignal(_) => "invalid-signal",
            Error::EmptyWindow { .. } => "empty-window",
            Error::InvalidWindow(_) => "invalid-window",
            Error::CannotSplit(_) => "cannot-split",
            Error::NoSupport => "no-support",
            Error::InsufficientLength { .. } => "insufficient-length",
            Error::CorruptDecomposition(_) => "corrupt-decomposition",
            Error::InvalidConfig(_) => "invalid-config",
            Error::NoData => "no-data",
            Error::InvalidThreshold(_) => "invalid-threshold",
            Error::DegenerateWindow(_) => "degenerate-window",
            Error::WindowTooShort { .. } => "window-too-short",
            Error::Unknown { .. } => "unknown-name",
            Error::CvInfeasible(_) => "cv-infeasible",
            Error::WidthMismatch { .. } => "width-mismatch",
            Error::NonFiniteFeature => "non-finite-feature",
            Error::UnknownLabel(_) => "unknown-label",
            Error::LengthMismatch(_) => "length-mismatch",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
