//! Shared test signals and spectral oracles. The oracles use `rustfft`, so
//! they are independent of the crate's own FFT.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use resvc_core::Waveform;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub const RATE: u32 = 22050;

pub fn white_noise(n: usize, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn sine(n: usize, freq: f64, amp: f64, rate: u32) -> Vec<f64> {
    (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin())
        .collect()
}

/// Pulse train whose fundamental follows `f0(t)` (Hz as a function of seconds).
pub fn pulse_train(n: usize, rate: u32, f0: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut phase = 1.0;
    (0..n)
        .map(|i| {
            let hz = f0(i as f64 / rate as f64);
            phase += hz / rate as f64;
            if phase >= 1.0 {
                phase -= phase.floor();
                (rate as f64 / hz).sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

/// Parallel two-pole resonator bank; formants are (center Hz, bandwidth Hz,
/// gain) and drift linearly from `start` to `end` over the signal.
pub fn formant_filter(x: &[f64], rate: u32, start: &[(f64, f64, f64)], end: &[(f64, f64, f64)]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    let n = x.len().max(1) as f64;
    for (&(f_a, b_a, g_a), &(f_b, b_b, g_b)) in start.iter().zip(end) {
        let mut y1 = 0.0;
        let mut y2 = 0.0;
        for (i, (&v, out)) in x.iter().zip(y.iter_mut()).enumerate() {
            let t = i as f64 / n;
            let f = f_a + (f_b - f_a) * t;
            let bw = b_a + (b_b - b_a) * t;
            let g = g_a + (g_b - g_a) * t;
            let r = (-PI * bw / rate as f64).exp();
            let theta = 2.0 * PI * f / rate as f64;
            let v = (1.0 - r) * v + 2.0 * r * theta.cos() * y1 - r * r * y2;
            y2 = y1;
            y1 = v;
            *out += g * v;
        }
    }
    // lip radiation
    let mut prev = 0.0;
    for v in y.iter_mut() {
        let cur = *v;
        *v = cur - 0.7 * prev;
        prev = cur;
    }
    y
}

pub const FORMANTS_A: [(f64, f64, f64); 4] = [(700.0, 130.0, 1.0), (1220.0, 90.0, 0.6), (2600.0, 160.0, 0.35), (3500.0, 250.0, 0.2)];
pub const FORMANTS_I: [(f64, f64, f64); 4] = [(300.0, 70.0, 1.0), (2300.0, 100.0, 0.4), (3000.0, 200.0, 0.3), (3700.0, 250.0, 0.2)];

/// Speech-like test utterance: pulse train with slight vibrato, drifting
/// formants, a little aspiration noise, scaled to `peak` on the int16 scale.
pub fn speech_like(seconds: f64, f0: f64, seed: u64, peak: f64) -> Waveform {
    let n = (seconds * RATE as f64) as usize;
    let exc = pulse_train(n, RATE, |t| f0 * (1.0 + 0.02 * (2.0 * PI * 5.0 * t).sin()));
    let noise = white_noise(n, 0.05, seed);
    let exc: Vec<f64> = exc.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let y = formant_filter(&exc, RATE, &FORMANTS_A, &FORMANTS_I);
    let m = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Waveform::new(y.iter().map(|v| v * peak / m).collect(), RATE).unwrap()
}

/// Speech-like signal with a constant fundamental (no vibrato) and static
/// formants.
pub fn steady_voiced(seconds: f64, f0: f64, peak: f64) -> Waveform {
    let n = (seconds * RATE as f64) as usize;
    let exc = pulse_train(n, RATE, |_| f0);
    let y = formant_filter(&exc, RATE, &FORMANTS_A, &FORMANTS_A);
    let m = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Waveform::new(y.iter().map(|v| v * peak / m).collect(), RATE).unwrap()
}

pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    let n = buf.len() as f64;
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf.iter().map(|c| c / n).collect()
}

pub fn real_fft(x: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().take(len).map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    fft(&buf)
}

pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Welch power spectrum (bins 0..=n/2) averaged over Hann frames with 50%
/// overlap.
pub fn welch(x: &[f64], n: usize) -> Vec<f64> {
    let w = hann(n);
    let mut acc = vec![0.0; n / 2 + 1];
    let mut frames = 0;
    let mut start = 0;
    while start + n <= x.len() {
        let frame: Vec<f64> = x[start..start + n].iter().zip(&w).map(|(a, b)| a * b).collect();
        let spec = real_fft(&frame, n);
        for (a, c) in acc.iter_mut().zip(&spec) {
            *a += c.norm_sqr();
        }
        frames += 1;
        start += n / 2;
    }
    acc.iter().map(|a| a / frames as f64).collect()
}

/// Frequency (Hz) of the largest DFT bin of the whole signal, refined by
/// parabolic interpolation on the log magnitude.
pub fn dominant_frequency(x: &[f64], rate: u32) -> f64 {
    let n = x.len().next_power_of_two() * 4;
    let w = hann(x.len());
    let frame: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
    let spec = real_fft(&frame, n);
    let mags: Vec<f64> = spec[..n / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len() - 1)
        .max_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap())
        .unwrap();
    let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
    let off = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + off) * rate as f64 / n as f64
}

/// Fundamental via the autocorrelation of the middle of the signal after a
/// 1.5 kHz brick-wall low-pass (so impulsive signals with fractional periods
/// still correlate at integer lags): the shortest lag whose normalized
/// autocorrelation reaches 90% of the best peak in `[rate/fmax, rate/fmin]`.
pub fn fundamental(x: &[f64], rate: u32, fmin: f64, fmax: f64) -> f64 {
    let lo = (rate as f64 / fmax).floor() as usize;
    let hi = (rate as f64 / fmin).ceil() as usize;
    let mid = &x[x.len() / 8..x.len() * 7 / 8];
    let n = mid.len();
    let mut spec = real_fft(mid, n);
    let edge = (1500.0 / rate as f64 * n as f64) as usize;
    for (k, c) in spec.iter_mut().enumerate() {
        if k.min(n - k) > edge {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let seg: Vec<f64> = ifft(&spec).iter().map(|c| c.re).collect();
    let seg = &seg[..];
    let ac = |lag: usize| -> f64 {
        let n = seg.len() - lag;
        let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            xy += seg[i] * seg[i + lag];
            xx += seg[i] * seg[i];
            yy += seg[i + lag] * seg[i + lag];
        }
        xy / (xx * yy).sqrt()
    };
    let r: Vec<f64> = (0..=hi + 1).map(|l| if l + 1 < lo { 0.0 } else { ac(l) }).collect();
    let peaks: Vec<usize> = (lo.max(1)..=hi)
        .filter(|&l| r[l] >= r[l - 1] && r[l] >= r[l + 1])
        .collect();
    let best = peaks.iter().map(|&l| r[l]).fold(f64::MIN, f64::max);
    let lag = *peaks.iter().find(|&&l| r[l] >= 0.9 * best).expect("no periodicity");
    let (a, b, c) = (r[lag - 1], r[lag], r[lag + 1]);
    let off = 0.5 * (a - c) / (a - 2.0 * b + c);
    rate as f64 / (lag as f64 + off)
}

pub fn snr_db(reference: &[f64], test: &[f64]) -> f64 {
    let n = reference.len().min(test.len());
    let sig: f64 = reference[..n].iter().map(|v| v * v).sum();
    let err: f64 = reference[..n].iter().zip(&test[..n]).map(|(a, b)| (a - b) * (a - b)).sum();
    10.0 * (sig / err).log10()
}

pub fn to_db(power_ratio: f64) -> f64 {
    10.0 * power_ratio.log10()
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}
