use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("odd-power coefficient of {power} is nonzero; spectrum is not symmetric about the shift")]
    OddTerm { power: usize },

    #[error("elimination failed: {0}")]
    Component(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("numerical failure: {message}")]
    Numerical { message: String, partial: Vec<num_complex::Complex<f64>> },

    #[error("spectrum error: {0}")]
    Spectrum(String),

    #[error("ill-conditioned eigenbasis: condition number {0:.3e}")]
    Conditioning(f64),

    #[error("ambiguous metric: restricted solution space has dimension {0}")]
    Ambiguity(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::UnsupportedDimension(_)
            | Error::Unsupported(_)
            | Error::OddTerm { .. }
            | Error::Ambiguity(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Component(_)
            | Error::Certification(_)
            | Error::Numerical { .. }
            | Error::Spectrum(_)
            | Error::Conditioning(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
