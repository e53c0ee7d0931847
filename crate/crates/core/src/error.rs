use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bit-rate {rate_bps} bps is not an operation point of the ladder")]
    NotOnLadder { rate_bps: u64 },

    #[error("bit-rate {rate_bps} bps is not a multiple of the base rate {base_bps} bps")]
    NotAMultiple { rate_bps: u64, base_bps: u64 },

    #[error("exhaustive search over {combinations} assignments exceeds the limit of {limit}")]
    EnumerationTooLarge { combinations: f64, limit: f64 },

    #[error("capacity of {units} cache units is too large to tabulate")]
    CapacityOverflow { units: u64 },

    #[error("invalid solution document: {0}")]
    Schema(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
