use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported sample rate {0} Hz (expected 22050)")]
    UnsupportedSampleRate(u32),

    #[error("corrupt bitstream at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("numerical failure at step {step} (sigma = {sigma:e}): {reason}")]
    Numerical { step: usize, sigma: f64, reason: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
