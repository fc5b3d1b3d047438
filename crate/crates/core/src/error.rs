use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge: best estimate {estimate} with error {error:e} \
         after {subdivisions} subdivisions"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("root not bracketed: target {target} outside [{f_lo}, {f_hi}] on [{lo}, {hi}]")]
    Bracket {
        target: f64,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("model is outside the supported limit cases: {0}")]
    UnsupportedCase(String),

    #[error("only {achieved} replications met the conditioning event, {required} required")]
    InsufficientReplications { achieved: usize, required: usize },

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("row {row}: {message}")]
    Input { row: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 2,
            Error::Input { .. } | Error::Io(_) | Error::Csv(_) => 3,
            Error::Quadrature { .. } | Error::Bracket { .. } => 4,
            Error::Domain(_) | Error::Misuse(_) | Error::UnsupportedCase(_) => 5,
            Error::DegenerateModel(_) => 6,
            Error::InsufficientReplications { .. } => 7,
        }
    }
}
