//! Short-time analysis: mel-cepstrum extraction, F0 estimation and
//! frame-sequence interpolation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dsp::{hann_symmetric, warp};
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::signal::{shift_samples, Waveform};

/// Default frequency-warping coefficient for 22.05 kHz audio.
pub const DEFAULT_ALPHA: f64 = 0.455;
pub const DEFAULT_FRAME_SHIFT_S: f64 = 0.005;
pub const DEFAULT_FRAME_LENGTH: usize = 1024;
pub const DEFAULT_ORDER: usize = 35;

/// Magnitude floor applied before taking the log.
pub const SPECTRAL_FLOOR: f64 = 1e-10;

/// Zero-padding factor of the analysis FFT used for warped-axis resampling.
const OVERSAMPLING: usize = 4;

/// Voiced F0 values must lie in this range (Hz).
pub const F0_RANGE: (f64, f64) = (40.0, 800.0);

const F0_FRAME_S: f64 = 0.040;
const VOICING_THRESHOLD: f64 = 0.3;

/// A sequence of mel-cepstral frames `c_0..c_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelCepstrumSequence {
    data: Vec<f64>,
    dim: usize,
    alpha: f64,
    frame_shift_s: f64,
    sample_rate: u32,
}

impl MelCepstrumSequence {
    /// Builds a sequence from per-frame coefficient vectors. All frames must
    /// have the same length of at least 2 (order >= 1).
    pub fn new(frames: Vec<Vec<f64>>, alpha: f64, frame_shift_s: f64, sample_rate: u32) -> Result<Self> {
        let dim = match frames.first() {
            Some(f) => f.len(),
            None => 2,
        };
        if frames.iter().any(|f| f.len() != dim) {
            return Err(Error::Configuration("mel-cepstrum frames differ in length".into()));
        }
        let data = frames.into_iter().flatten().collect();
        Self::from_flat(data, dim, alpha, frame_shift_s, sample_rate)
    }

    /// Builds a sequence from row-major frame data.
    pub fn from_flat(data: Vec<f64>, dim: usize, alpha: f64, frame_shift_s: f64, sample_rate: u32) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Configuration("mel-cepstrum order must be at least 1".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Configuration("frame data is not a whole number of frames".into()));
        }
        // alpha = 0 (no warping) is accepted so that plain cepstra fit the same type
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Configuration(alloc::format!("alpha {alpha} outside [0, 1)")));
        }
        if !(frame_shift_s > 0.0 && frame_shift_s.is_finite()) {
            return Err(Error::Configuration("frame shift must be positive".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Configuration("sample rate must be positive".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("mel-cepstrum contains non-finite values".into()));
        }
        Ok(Self {
            data,
            dim,
            alpha,
            frame_shift_s,
            sample_rate,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Highest coefficient index `M`.
    pub fn order(&self) -> usize {
        self.dim - 1
    }

    /// Number of coefficients per frame, `M + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn frame_shift_s(&self) -> f64 {
        self.frame_shift_s
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn shift_samples(&self) -> usize {
        shift_samples(self.frame_shift_s, self.sample_rate)
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// The trajectory of coefficient `d` over all frames.
    pub fn track(&self, d: usize) -> Vec<f64> {
        self.frames().map(|f| f[d]).collect()
    }

    pub(crate) fn frame_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.dim..(t + 1) * self.dim]
    }

    /// Same metadata, new frame data.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % self.dim, 0);
        Self {
            data,
            dim: self.dim,
            alpha: self.alpha,
            frame_shift_s: self.frame_shift_s,
            sample_rate: self.sample_rate,
        }
    }

    /// True when `other` has the same frame count, order and metadata.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.frame_count() == other.frame_count()
            && self.alpha == other.alpha
            && self.frame_shift_s == other.frame_shift_s
            && self.sample_rate == other.sample_rate
    }
}

/// Per-frame F0 in Hz; 0.0 marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Contour {
    values: Vec<f64>,
    frame_shift_s: f64,
}

impl F0Contour {
    pub fn new(values: Vec<f64>, frame_shift_s: f64) -> Result<Self> {
        if !(frame_shift_s > 0.0 && frame_shift_s.is_finite()) {
            return Err(Error::Configuration("frame shift must be positive".into()));
        }
        for (t, &v) in values.iter().enumerate() {
            let ok = v == 0.0 || (v >= F0_RANGE.0 && v <= F0_RANGE.1);
            if !ok {
                return Err(Error::Configuration(alloc::format!(
                    "F0 value {v} at frame {t} is neither 0 nor within [{}, {}] Hz",
                    F0_RANGE.0,
                    F0_RANGE.1
                )));
            }
        }
        Ok(Self {
            values,
            frame_shift_s,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frame_shift_s(&self) -> f64 {
        self.frame_shift_s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn voiced(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|&v| v > 0.0)
    }

    /// Nearest-frame resampling onto `frame_count` frames over the same span.
    pub fn resample_frames(&self, frame_count: usize) -> Self {
        let n = self.values.len();
        let values = if n == 0 {
            vec![0.0; frame_count]
        } else if frame_count <= 1 || n == 1 {
            vec![self.values[0]; frame_count]
        } else {
            (0..frame_count)
                .map(|i| {
                    let p = i as f64 * (n - 1) as f64 / (frame_count - 1) as f64;
                    self.values[(libm::round(p) as usize).min(n - 1)]
                })
                .collect()
        };
        Self {
            values,
            frame_shift_s: self.frame_shift_s,
        }
    }
}

/// Reusable per-frame mel-cepstrum analyzer.
struct McepAnalyzer {
    frame_length: usize,
    order: usize,
    window: Vec<f64>,
    window_norm: f64,
    spectrum_fft: Fft,
    cepstrum_fft: Fft,
    // fractional oversampled-bin position for every warped bin 0..=N/2
    warped_positions: Vec<f64>,
}

impl McepAnalyzer {
    fn new(frame_length: usize, order: usize, alpha: f64) -> Self {
        let window = hann_symmetric(frame_length);
        let window_norm = libm::sqrt(window.iter().map(|w| w * w).sum::<f64>());
        let half = frame_length / 2;
        let padded = frame_length * OVERSAMPLING;
        let warped_positions = (0..=half)
            .map(|j| {
                let beta = PI * j as f64 / half as f64;
                let omega = warp(beta, -alpha);
                omega / (2.0 * PI) * padded as f64
            })
            .collect();
        Self {
            frame_length,
            order,
            window,
            window_norm,
            spectrum_fft: Fft::new(padded),
            cepstrum_fft: Fft::new(frame_length),
            warped_positions,
        }
    }

    fn analyze(&self, frame: &[f64], out: &mut Vec<f64>) {
        let n = self.frame_length;
        let padded = n * OVERSAMPLING;
        let mut spec = vec![Complex64::new(0.0, 0.0); padded];
        for ((s, &x), &w) in spec.iter_mut().zip(frame).zip(&self.window) {
            s.re = x * w;
        }
        self.spectrum_fft.forward(&mut spec);
        let log_mag: Vec<f64> = spec[..=padded / 2]
            .iter()
            .map(|c| libm::log((c.norm() / self.window_norm).max(SPECTRAL_FLOOR)))
            .collect();

        // log spectrum on the warped axis, mirrored to a full even sequence
        let half = n / 2;
        let mut ceps = vec![Complex64::new(0.0, 0.0); n];
        for (j, &pos) in self.warped_positions.iter().enumerate() {
            let i = (libm::floor(pos) as usize).min(log_mag.len() - 2);
            let frac = pos - i as f64;
            let v = (1.0 - frac) * log_mag[i] + frac * log_mag[i + 1];
            ceps[j].re = v;
            if j > 0 && j < half {
                ceps[n - j].re = v;
            }
        }
        self.cepstrum_fft.inverse(&mut ceps);
        let scale = 1.0 / n as f64;
        out.push(ceps[0].re * scale);
        out.extend(ceps[1..=self.order].iter().map(|c| 2.0 * c.re * scale));
    }
}

fn check_mcep_params(order: usize, alpha: f64, frame_shift_s: f64, frame_length: usize) -> Result<()> {
    if order < 1 {
        return Err(Error::Configuration("mel-cepstrum order must be at least 1".into()));
    }
    if !frame_length.is_power_of_two() || frame_length < 64 {
        return Err(Error::Configuration(alloc::format!(
            "frame length {frame_length} must be a power of two >= 64"
        )));
    }
    if order >= frame_length / 2 {
        return Err(Error::Configuration("order must be below half the frame length".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Configuration(alloc::format!("alpha {alpha} outside [0, 1)")));
    }
    if !(frame_shift_s > 0.0 && frame_shift_s.is_finite()) {
        return Err(Error::Configuration("frame shift must be positive".into()));
    }
    Ok(())
}

/// Extracts mel-cepstra from Hann-windowed frames starting at `t * shift`.
///
/// The magnitude spectrum is normalized by the window energy, so a frame of
/// white noise with standard deviation `s` has `c_0` near `log(s)`. Produces
/// `floor((len - frame_length) / shift) + 1` frames.
pub fn extract_mcep(
    w: &Waveform,
    order: usize,
    alpha: f64,
    frame_shift_s: f64,
    frame_length: usize,
) -> Result<MelCepstrumSequence> {
    check_mcep_params(order, alpha, frame_shift_s, frame_length)?;
    if w.len() < frame_length {
        return Err(Error::InsufficientData {
            what: "mel-cepstrum extraction (samples)",
            needed: frame_length,
            got: w.len(),
        });
    }
    let shift = shift_samples(frame_shift_s, w.sample_rate());
    let count = (w.len() - frame_length) / shift + 1;
    let analyzer = McepAnalyzer::new(frame_length, order, alpha);
    let mut data = Vec::with_capacity(count * (order + 1));
    for t in 0..count {
        let start = t * shift;
        analyzer.analyze(&w.samples()[start..start + frame_length], &mut data);
    }
    MelCepstrumSequence::from_flat(data, order + 1, alpha, frame_shift_s, w.sample_rate())
}

/// Like [`extract_mcep`], but frame `t` is centered on sample `t * shift`.
/// The signal is mirror-padded by half a frame at both ends, giving
/// `floor(len / shift) + 1` frames that cover the whole signal.
pub fn extract_mcep_centered(
    w: &Waveform,
    order: usize,
    alpha: f64,
    frame_shift_s: f64,
    frame_length: usize,
) -> Result<MelCepstrumSequence> {
    check_mcep_params(order, alpha, frame_shift_s, frame_length)?;
    if w.is_empty() {
        return Err(Error::InsufficientData {
            what: "mel-cepstrum extraction (samples)",
            needed: 1,
            got: 0,
        });
    }
    let half = frame_length / 2;
    let x = w.samples();
    let n = x.len() as isize;
    let mut padded = Vec::with_capacity(x.len() + frame_length);
    for i in -(half as isize)..n + half as isize {
        let mut j = i;
        if j < 0 {
            j = -j;
        }
        if j >= n {
            j = 2 * (n - 1) - j;
        }
        padded.push(if (0..n).contains(&j) { x[j as usize] } else { 0.0 });
    }
    // make the padded length land exactly on frame boundaries
    let shift = shift_samples(frame_shift_s, w.sample_rate());
    let count = x.len() / shift + 1;
    padded.resize((count - 1) * shift + frame_length, 0.0);
    let padded = Waveform::from_parts(padded, w.sample_rate());
    extract_mcep(&padded, order, alpha, frame_shift_s, frame_length)
}

/// Log magnitude of the mel-cepstral transfer function on `n_bins` uniformly
/// spaced frequencies from DC to Nyquist inclusive.
pub fn mcep_to_log_spectrum(frame: &[f64], alpha: f64, n_bins: usize) -> Vec<f64> {
    let n_bins = n_bins.max(2);
    (0..n_bins)
        .map(|i| {
            let omega = PI * i as f64 / (n_bins - 1) as f64;
            let beta = warp(omega, alpha);
            frame
                .iter()
                .enumerate()
                .map(|(k, &c)| c * libm::cos(k as f64 * beta))
                .sum()
        })
        .collect()
}

/// Normalized-autocorrelation F0 estimator.
///
/// Each frame is a 40 ms Hann window centered on `t * shift`. The
/// autocorrelation of the windowed frame is divided by the autocorrelation of
/// the window itself, and the shortest lag whose peak reaches 90% of the best
/// peak is chosen. Lags are searched in `[rate/fmax, rate/fmin]`, capped at
/// half the frame. Peaks below 0.3 are unvoiced.
pub fn estimate_f0(w: &Waveform, frame_shift_s: f64, fmin: f64, fmax: f64) -> Result<F0Contour> {
    if !(fmin > 0.0 && fmin < fmax) {
        return Err(Error::Configuration(alloc::format!(
            "F0 search range [{fmin}, {fmax}] is invalid"
        )));
    }
    let rate = w.sample_rate() as f64;
    let shift = shift_samples(frame_shift_s, w.sample_rate());
    let count = if w.is_empty() {
        0
    } else {
        (libm::round(w.len() as f64 / shift as f64) as usize).max(1)
    };
    let frame_len = libm::round(F0_FRAME_S * rate) as usize;
    let window = hann_symmetric(frame_len);
    let fft_len = (2 * frame_len).next_power_of_two();
    let fft = Fft::new(fft_len);

    let autocorr = |frame: &[f64]| -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
        for (b, &v) in buf.iter_mut().zip(frame) {
            b.re = v;
        }
        fft.forward(&mut buf);
        for b in buf.iter_mut() {
            *b = Complex64::new(b.norm_sqr(), 0.0);
        }
        fft.inverse(&mut buf);
        buf[..frame_len].iter().map(|c| c.re / fft_len as f64).collect()
    };
    let window_ac = autocorr(&window);

    let min_lag = (libm::floor(rate / fmax) as usize).max(2);
    let max_lag = (libm::ceil(rate / fmin) as usize).min(frame_len / 2);

    let x = w.samples();
    let mut values = Vec::with_capacity(count);
    let mut frame = vec![0.0; frame_len];
    for t in 0..count {
        let start = (t * shift) as isize - (frame_len / 2) as isize;
        for (i, f) in frame.iter_mut().enumerate() {
            let idx = start + i as isize;
            let v = if idx >= 0 && (idx as usize) < x.len() {
                x[idx as usize]
            } else {
                0.0
            };
            *f = v * window[i];
        }
        let ac = autocorr(&frame);
        if ac[0] <= 0.0 || min_lag + 1 >= max_lag {
            values.push(0.0);
            continue;
        }
        let rho: Vec<f64> = (0..=max_lag)
            .map(|lag| (ac[lag] / ac[0]) / (window_ac[lag] / window_ac[0]))
            .collect();
        values.push(pick_period(&rho, min_lag, max_lag).map_or(0.0, |lag| {
            let f0 = rate / lag;
            if f0 >= F0_RANGE.0 && f0 <= F0_RANGE.1 && f0 >= fmin * 0.98 && f0 <= fmax * 1.02 {
                f0
            } else {
                0.0
            }
        }));
    }
    F0Contour::new(values, frame_shift_s)
}

/// Returns the refined period (in samples) or `None` when unvoiced.
fn pick_period(rho: &[f64], min_lag: usize, max_lag: usize) -> Option<f64> {
    let peaks: Vec<usize> = (min_lag.max(1)..max_lag)
        .filter(|&l| rho[l] >= rho[l - 1] && rho[l] >= rho[l + 1])
        .collect();
    let best = peaks.iter().map(|&l| rho[l]).fold(f64::NEG_INFINITY, f64::max);
    if !(best >= VOICING_THRESHOLD) {
        return None;
    }
    let lag = *peaks.iter().find(|&&l| rho[l] >= 0.9 * best)?;
    let (a, b, c) = (rho[lag - 1], rho[lag], rho[lag + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(lag as f64 + offset.clamp(-0.5, 0.5))
}

/// Linear interpolation of every coefficient track onto `target_frame_count`
/// frames spanning the same normalized time axis. First and last frames are
/// preserved exactly.
pub fn interpolate_frames(m: &MelCepstrumSequence, target_frame_count: usize) -> Result<MelCepstrumSequence> {
    let count = m.frame_count();
    if count < 2 {
        return Err(Error::InsufficientData {
            what: "frame interpolation (source frames)",
            needed: 2,
            got: count,
        });
    }
    if target_frame_count < 2 {
        return Err(Error::InsufficientData {
            what: "frame interpolation (target frames)",
            needed: 2,
            got: target_frame_count,
        });
    }
    let dim = m.dim();
    let mut data = Vec::with_capacity(target_frame_count * dim);
    for i in 0..target_frame_count {
        let pos = (i * (count - 1)) as f64 / (target_frame_count - 1) as f64;
        let lo = (libm::floor(pos) as usize).min(count - 2);
        let frac = pos - lo as f64;
        let (a, b) = (m.frame(lo), m.frame(lo + 1));
        data.extend(a.iter().zip(b).map(|(&a, &b)| (1.0 - frac) * a + frac * b));
    }
    Ok(m.with_data(data))
}
