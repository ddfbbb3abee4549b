use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("degenerate signal: {0}")]
    DegenerateSignal(&'static str),

    #[error("alignment mismatch in {what}: expected {expected}, got {actual}")]
    Alignment {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("invalid waveform: {0}")]
    InvalidWaveform(&'static str),

    #[error("step {step}: {source}")]
    Stage {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, step: &'static str) -> Self {
        Error::Stage {
            step,
            source: Box::new(self),
        }
    }
}
