//! Collapsed-waveform detection and feature substitution.
//!
//! A collapse shows up as excess envelope energy in the GV-postfiltered
//! synthesis compared with a vocoder reference built from the same features.
//! Flagged frames fall back to the features without postfiltering.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::analysis::MelCepstrumSequence;
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::signal::Waveform;

pub const DEFAULT_SLOT_LENGTH: usize = 256;
/// Default detection threshold on the 16-bit amplitude scale.
pub const DEFAULT_THRESHOLD: f64 = 10000.0;

/// A smoothed, non-negative amplitude envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSignal {
    values: Vec<f64>,
    slot_length: usize,
    sample_rate: u32,
}

impl EnvelopeSignal {
    /// Wraps precomputed envelope values.
    pub fn new(values: Vec<f64>, slot_length: usize, sample_rate: u32) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Configuration("envelope values must be finite and non-negative".into()));
        }
        Ok(Self {
            values,
            slot_length,
            sample_rate,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slot_length(&self) -> usize {
        self.slot_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Magnitude of the analytic signal, computed with a full-length DFT.
pub fn analytic_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let fft = Fft::new(n);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    // keep DC (and Nyquist for even n), double positive, zero negative bins
    let positive_end = n.div_ceil(2);
    for b in buf.iter_mut().take(positive_end).skip(1) {
        *b *= 2.0;
    }
    for b in buf.iter_mut().skip(n / 2 + 1) {
        *b = Complex64::new(0.0, 0.0);
    }
    fft.inverse(&mut buf);
    buf.iter().map(|c| c.norm() / n as f64).collect()
}

/// Hilbert magnitude, max-pooled over non-overlapping slots, then smoothed
/// with a centered moving average of width `2 * slot_length + 1`.
pub fn extract_envelope(w: &Waveform, slot_length: usize) -> Result<EnvelopeSignal> {
    if w.is_empty() {
        return Err(Error::InsufficientData {
            what: "envelope extraction (samples)",
            needed: 1,
            got: 0,
        });
    }
    if slot_length < 8 {
        return Err(Error::Configuration(alloc::format!("slot length {slot_length} below 8")));
    }
    let mut held = analytic_magnitude(w.samples());
    for slot in held.chunks_mut(slot_length) {
        let peak = slot.iter().copied().fold(0.0, f64::max);
        slot.fill(peak);
    }
    let values = moving_average(&held, slot_length);
    EnvelopeSignal::new(values, slot_length, w.sample_rate())
}

/// Centered moving average; the window shrinks at the edges.
fn moving_average(x: &[f64], half: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        prefix.push(acc);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            // prefix sums can leave tiny negative residues on silent stretches
            ((prefix[hi] - prefix[lo]) / (hi - lo) as f64).max(0.0)
        })
        .collect()
}

/// Frames in `[0, frame_count)` containing at least one sample where
/// `env_test - env_ref > threshold`. Frame `t` spans samples
/// `[t * shift, (t + 1) * shift)`.
pub fn detect_collapsed_frames(
    env_ref: &EnvelopeSignal,
    env_test: &EnvelopeSignal,
    threshold: f64,
    frame_shift_samples: usize,
    frame_count: usize,
) -> Result<BTreeSet<usize>> {
    if !(threshold > 0.0) {
        return Err(Error::Configuration(alloc::format!("threshold {threshold} must be positive")));
    }
    if frame_shift_samples == 0 {
        return Err(Error::Configuration("frame shift must be positive".into()));
    }
    let n = env_ref.len().min(env_test.len());
    let slack = env_ref.slot_length().max(env_test.slot_length());
    if env_ref.len().abs_diff(env_test.len()) > slack {
        log::warn!(
            "envelope lengths differ by more than one slot ({} vs {}); comparing the common prefix",
            env_ref.len(),
            env_test.len()
        );
    }
    let flagged = env_ref.values()[..n]
        .iter()
        .zip(&env_test.values()[..n])
        .enumerate()
        .filter(|(_, (r, t))| *t - *r > threshold)
        .map(|(i, _)| i / frame_shift_samples)
        .filter(|&t| t < frame_count)
        .collect();
    Ok(flagged)
}

/// Replaces flagged frames of `postfiltered` by the matching frames of
/// `plain`.
pub fn substitute_features(
    postfiltered: &MelCepstrumSequence,
    plain: &MelCepstrumSequence,
    flagged: &BTreeSet<usize>,
) -> Result<MelCepstrumSequence> {
    if !postfiltered.same_shape(plain) {
        return Err(Error::Alignment {
            what: "postfiltered vs plain feature frames",
            expected: postfiltered.frame_count(),
            actual: plain.frame_count(),
        });
    }
    let mut out = postfiltered.clone();
    for &t in flagged.range(..postfiltered.frame_count()) {
        out.frame_mut(t).copy_from_slice(plain.frame(t));
    }
    Ok(out)
}
