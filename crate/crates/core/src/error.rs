use thiserror::Error;

/// Errors raised by the model, solvers and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("g(t) is not representable at t = {t}")]
    Overflow { t: f64 },

    #[error("grid too coarse: dt = {dt} exceeds the stability bound {bound}")]
    GridTooCoarse { dt: f64, bound: f64 },

    #[error("horizon {horizon} too short: view rate still rising at the end")]
    HorizonTooShort { horizon: f64 },

    #[error("degenerate trace `{0}`: all counts are zero")]
    DegenerateTrace(String),

    #[error("trace `{video_id}` has {len} days, fewer than the window of {window}")]
    WindowTooLong {
        video_id: String,
        len: usize,
        window: usize,
    },

    #[error("window of trace `{0}` contains no views")]
    EmptyWindow(String),

    #[error("trace `{video_id}` too short: {len} days, need at least {min}")]
    TraceTooShort {
        video_id: String,
        len: usize,
        min: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("traces have unequal lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
