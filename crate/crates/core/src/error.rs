use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown PDE '{0}'")]
    UnknownPde(String),

    #[error("unknown library term '{0}'")]
    UnknownTerm(String),

    #[error("solver blow-up at step {step} (t = {time:.6})")]
    BlowUp { step: usize, time: f64 },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("grid too small for test-function margins: need nt >= {min_nt} and nx >= {min_nx}")]
    TestGridTooSmall { min_nt: usize, min_nx: usize },

    #[error("degenerate test-function support: {0}")]
    DegenerateSupport(String),

    #[error("no reliable Fourier modes")]
    NoReliableModes,

    #[error("empty truth support")]
    EmptyTruth,

    #[error("zero field")]
    ZeroField,

    #[error("container format: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
