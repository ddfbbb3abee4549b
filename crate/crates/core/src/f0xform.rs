//! Constant-ratio F0 transformation.
//!
//! The waveform is first time-scaled by the ratio with WSOLA (pitch kept),
//! and the residual of the time-scaled signal is then resampled back to the
//! original length, which scales every frequency by the ratio. When the pitch
//! goes down, the residual is zero-stuffed first so the vacated high band is
//! filled by a mirror image of the low band.

use alloc::vec;
use alloc::vec::Vec;

use crate::dsp::{bessel_i0, hann_periodic, sinc};
use crate::error::{Error, Result};
use crate::signal::Waveform;

pub const MIN_RATIO: f64 = 0.25;
pub const MAX_RATIO: f64 = 4.0;

pub const WSOLA_WINDOW_S: f64 = 0.025;
pub const WSOLA_TOLERANCE_S: f64 = 0.0075;

/// Taps of the windowed-sinc interpolation kernel (at the output rate).
pub const RESAMPLER_TAPS: usize = 32;
pub const KAISER_BETA: f64 = 8.0;

/// A time-invariant F0 transformation ratio in `[0.25, 4.0]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct F0Ratio(f64);

impl F0Ratio {
    pub fn new(value: f64) -> Result<Self> {
        if !(MIN_RATIO..=MAX_RATIO).contains(&value) {
            return Err(Error::Configuration(alloc::format!(
                "F0 ratio {value} outside [{MIN_RATIO}, {MAX_RATIO}]"
            )));
        }
        Ok(Self(value))
    }

    pub const fn identity() -> Self {
        Self(1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Ratio between the mean log-F0 of target and source speakers.
pub fn compute_f0_ratio(source_logf0_mean: f64, target_logf0_mean: f64) -> Result<F0Ratio> {
    if !source_logf0_mean.is_finite() || !target_logf0_mean.is_finite() {
        return Err(Error::Statistics(alloc::format!(
            "non-finite log-F0 mean (source {source_logf0_mean}, target {target_logf0_mean})"
        )));
    }
    F0Ratio::new(libm::exp(target_logf0_mean - source_logf0_mean))
}

struct WsolaParams {
    window: usize,
    hop: usize,
    tolerance: usize,
}

impl WsolaParams {
    fn for_rate(rate: u32) -> Self {
        let mut window = libm::round(WSOLA_WINDOW_S * rate as f64) as usize;
        window += window % 2;
        let window = window.max(4);
        Self {
            window,
            hop: window / 2,
            tolerance: libm::round(WSOLA_TOLERANCE_S * rate as f64) as usize,
        }
    }
}

/// WSOLA window length in samples at `rate`.
pub fn wsola_window_samples(rate: u32) -> usize {
    WsolaParams::for_rate(rate).window
}

fn normalized_xcorr(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    let denom = libm::sqrt(aa * bb);
    if denom > 0.0 {
        ab / denom
    } else {
        0.0
    }
}

/// Time-scale modification by `ratio`: the output lasts `ratio` times as
/// long as the input while keeping its pitch.
///
/// Segments of a 25 ms Hann window are overlap-added at a 50% synthesis hop.
/// Each segment is taken within ±7.5 ms of its nominal input position, at
/// the offset maximizing the normalized cross-correlation with the natural
/// continuation of the previous segment. Output length is
/// `round(ratio * len)`. A ratio of exactly 1 returns the input unchanged.
pub fn wsola(w: &Waveform, ratio: F0Ratio) -> Result<Waveform> {
    let p = WsolaParams::for_rate(w.sample_rate());
    if w.len() < 4 * p.window {
        return Err(Error::InsufficientData {
            what: "WSOLA input (samples)",
            needed: 4 * p.window,
            got: w.len(),
        });
    }
    if ratio.value() == 1.0 {
        return Ok(w.clone());
    }
    let r = ratio.value();
    let out_len = libm::round(r * w.len() as f64) as usize;
    let (win, hop, tol) = (p.window, p.hop, p.tolerance);

    // input padded so any candidate segment can be read without bounds checks
    let pad = win + tol + hop;
    let mut input = vec![0.0; pad];
    input.extend_from_slice(w.samples());
    input.resize(input.len() + pad + win, 0.0);
    let last_start = (input.len() - win - hop) as isize;

    let window = hann_periodic(win);
    // frame k covers output [k*hop - hop, k*hop + hop)
    let frames = out_len / hop + 2;
    let mut out = vec![0.0; frames * hop + win];
    let mut prev_start: Option<isize> = None;
    for k in 0..frames {
        let center_out = (k * hop) as f64;
        let nominal = libm::round(center_out / r) as isize - hop as isize + pad as isize;
        let start = match prev_start {
            None => nominal,
            Some(prev) => {
                let natural = &input[(prev + hop as isize) as usize..][..win];
                let lo = (nominal - tol as isize).max(0);
                let hi = (nominal + tol as isize).min(last_start);
                let mut best = (f64::NEG_INFINITY, nominal.clamp(0, last_start));
                for cand in lo..=hi {
                    let score = normalized_xcorr(&input[cand as usize..][..win], natural);
                    if score > best.0 {
                        best = (score, cand);
                    }
                }
                best.1
            }
        };
        let segment = &input[start as usize..][..win];
        // output index shifted by one hop so frame 0 straddles sample 0
        for (o, (&s, &g)) in out[k * hop..].iter_mut().zip(segment.iter().zip(&window)) {
            *o += s * g;
        }
        prev_start = Some(start);
    }
    let samples: Vec<f64> = out[hop..hop + out_len].to_vec();
    Ok(Waveform::from_parts(samples, w.sample_rate()))
}

/// Inserts a zero after every sample and doubles the declared sample rate.
pub fn zero_stuff(w: &Waveform) -> Waveform {
    let samples = w.samples().iter().flat_map(|&s| [s, 0.0]).collect();
    Waveform::from_parts(samples, w.sample_rate() * 2)
}

/// Reads `x` at `read_rate` input samples per output sample with a Kaiser
/// windowed sinc. When reading faster than 1, the kernel is a low-pass at
/// `1 / read_rate` of the input Nyquist frequency.
fn resample_samples(x: &[f64], read_rate: f64) -> Vec<f64> {
    let out_len = libm::round(x.len() as f64 / read_rate) as usize;
    let cutoff = (1.0 / read_rate).min(1.0);
    let half_width = (RESAMPLER_TAPS / 2) as f64 / cutoff;
    let i0_beta = bessel_i0(KAISER_BETA);
    let n = x.len() as isize;
    (0..out_len)
        .map(|j| {
            let pos = j as f64 * read_rate;
            let first = libm::ceil(pos - half_width) as isize;
            let last = libm::floor(pos + half_width) as isize;
            let mut acc = 0.0;
            for k in first.max(0)..=last.min(n - 1) {
                let d = pos - k as f64;
                let u = d / half_width;
                if u.abs() >= 1.0 {
                    continue;
                }
                let kaiser = bessel_i0(KAISER_BETA * libm::sqrt(1.0 - u * u)) / i0_beta;
                acc += x[k as usize] * cutoff * sinc(cutoff * d) * kaiser;
            }
            acc
        })
        .collect()
}

/// Reads the input at relative rate `ratio`, scaling every frequency by the
/// ratio. The output has `round(len / ratio)` samples and keeps the input's
/// declared sample rate.
pub fn resample(w: &Waveform, ratio: F0Ratio) -> Waveform {
    Waveform::from_parts(resample_samples(w.samples(), ratio.value()), w.sample_rate())
}

/// Residual power compensation: scales by `sqrt(1 / ratio)`.
pub fn compensate_residual_power(res: &Waveform, ratio: F0Ratio) -> Waveform {
    if ratio.value() == 1.0 {
        return res.clone();
    }
    res.scaled(libm::sqrt(1.0 / ratio.value()))
}

/// F0 transformation of a (time-scaled) residual.
///
/// For ratios below 1 the residual is zero-stuffed and read at `2 * ratio`,
/// which restores the original sample rate and fills the upper band with
/// the mirrored spectrum. Otherwise it is resampled directly. Either way the
/// result is power-compensated.
pub fn f0_transform_residual(res: &Waveform, ratio: F0Ratio) -> Result<Waveform> {
    let r = ratio.value();
    let shifted = if r < 1.0 {
        let folded = zero_stuff(res);
        let samples = resample_samples(folded.samples(), 2.0 * r);
        Waveform::from_parts(samples, res.sample_rate())
    } else {
        resample(res, ratio)
    };
    Ok(compensate_residual_power(&shifted, ratio))
}
