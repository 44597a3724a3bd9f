use thiserror::Error;

/// Errors raised by the core numeric and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("unsupported spherical harmonic order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("no t-design of degree {0} is available")]
    UnsupportedDesign(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRate(u32, u32),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("zero-energy signal: {0}")]
    ZeroEnergy(String),

    #[error("unknown convention '{0}'")]
    UnknownConvention(String),

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
