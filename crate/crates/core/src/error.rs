use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("spectral bound requires 32*chi*(mu+chi+gamma) > 1, got {product}")]
    BoundInvalid { product: f64 },

    #[error("degenerate eigenvectors: {0}")]
    DegenerateEigenvectors(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("fit failure: {0}")]
    Fit(String),

    #[error("solution blew up at t = {time}: {detail}")]
    Blowup { time: f64, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
