//! Time-domain waveforms and power normalization.
//!
//! Amplitudes are on the 16-bit PCM scale: full scale maps to ±32768.0. The
//! collapse-detection threshold is expressed on this scale, so every signal
//! in the pipeline keeps it.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A mono sample sequence with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    /// Builds a waveform, rejecting non-finite samples and a zero rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidWaveform("sample rate must be positive"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidWaveform("samples must be finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Internal constructor for samples produced by finite arithmetic on
    /// finite inputs.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self::from_parts(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }
}

/// Frame shift in samples for a shift given in seconds.
pub fn shift_samples(frame_shift_s: f64, sample_rate: u32) -> usize {
    libm::round(frame_shift_s * sample_rate as f64).max(1.0) as usize
}

/// Signal energy, the sum of squared samples.
pub fn power(w: &Waveform) -> f64 {
    w.samples.iter().map(|s| s * s).sum()
}

/// Rescales `y` so that its energy equals the energy of `reference`.
pub fn match_power(y: &Waveform, reference: &Waveform) -> Result<Waveform> {
    let py = power(y);
    if py == 0.0 {
        return Err(Error::DegenerateSignal("cannot match power of a silent signal"));
    }
    let pr = power(reference);
    Ok(y.scaled(libm::sqrt(pr / py)))
}
