use thiserror::Error;

/// Errors raised across the synthesis, estimation and analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Nyquist violation: fs = {fs} Hz must exceed 2*f0 = {} Hz", 2.0 * f0)]
    Nyquist { fs: f64, f0: f64 },

    #[error("fs/f0 = {ratio} is not a positive integer number of samples per cycle")]
    NonIntegerCycle { ratio: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fs = {fs} Hz is not an integer multiple of the reporting rate {fps} fps")]
    NonIntegerDecimation { fs: f64, fps: f64 },

    #[error("signal of {len} samples is shorter than one {window}-sample window")]
    SignalTooShort { len: usize, window: usize },

    #[error("window of {window} samples does not match signal with {n_per_cycle} samples per cycle")]
    WindowMismatch { window: usize, n_per_cycle: usize },

    #[error("anti-alias filter needs {required} taps, budget is {budget}")]
    FilterTooLong { required: usize, budget: usize },

    #[error("baseband decomposition needs a modulated signal (kind = none)")]
    Unmodulated,

    #[error("no oscillation detected")]
    NoOscillation,

    #[error("rank-deficient sinusoid fit at fm = {fm} Hz (frequency aliases to DC or too few frames)")]
    RankDeficient { fm: f64 },

    #[error("unrecoverable: oscillation at comb-null frequency {fm} Hz")]
    CombNull { fm: f64 },

    #[error("ill-conditioned recovery: gain {gain:.3e} below floor {floor:.3e} at {fm} Hz")]
    IllConditioned { fm: f64, gain: f64, floor: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
