use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("character code {code} is outside the alphabet of size {sigma}")]
    InvalidCode { code: u32, sigma: u32 },

    #[error("alphabet size {0} is not supported (expected 1..=65536)")]
    InvalidAlphabet(u32),

    #[error("index {index} out of range for string of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("window [{start}, {start}+{length}) does not fit a string of length {len} with {bits} bits per character")]
    WindowOutOfRange {
        start: usize,
        length: usize,
        len: usize,
        bits: u32,
    },

    #[error("pattern is empty")]
    EmptyPattern,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("K-state {0} has no forward transition")]
    NoForwardTransition(usize),

    #[error("K-state 0 has no failure transition")]
    NoFailureTransition,

    #[error("encoded differences need {used} bits but only {capacity} are available")]
    EncodingOverflow { used: usize, capacity: usize },

    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),

    #[error("table cache: {0}")]
    CacheFormat(String),

    #[error("byte 0x{byte:02x} at offset {offset} has no code in the {alphabet} alphabet")]
    UnmappableByte {
        offset: usize,
        byte: u8,
        alphabet: String,
    },

    #[error("invalid alphabet mapping: {0}")]
    InvalidMapping(String),

    #[error("engines disagree: {0}")]
    Disagreement(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::MalformedEncoding(msg.into())
    }
}
