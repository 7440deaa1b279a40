use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("time {t} s is before the schedule start {start} s")]
    BeforeSchedule { t: f64, start: f64 },

    #[error("estimator is still warming up ({have} of {need} samples)")]
    WarmUp { have: usize, need: usize },

    #[error("NaN detected at tick {tick}")]
    NanAtTick { tick: usize },

    #[error("empty time series")]
    EmptySeries,

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("missing config key `{0}`")]
    MissingKey(String),

    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(name))
    }
}
