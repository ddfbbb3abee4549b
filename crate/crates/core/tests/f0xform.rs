mod common;

use common::*;
use proptest::prelude::*;
use resvc_core::analysis::MelCepstrumSequence;
use resvc_core::f0xform::{
    compensate_residual_power, compute_f0_ratio, f0_transform_residual, resample, wsola, zero_stuff,
};
use resvc_core::mlsa::inverse_filter;
use resvc_core::signal::power;
use resvc_core::{F0Ratio, Waveform};

fn wave(x: Vec<f64>) -> Waveform {
    Waveform::new(x, RATE).unwrap()
}

fn ratio(r: f64) -> F0Ratio {
    F0Ratio::new(r).unwrap()
}

/// Mean power of a Welch spectrum over the fraction range `[lo, hi)` of the
/// band up to Nyquist.
fn band_power(p: &[f64], lo: f64, hi: f64) -> f64 {
    let n = p.len() - 1;
    let (a, b) = ((lo * n as f64) as usize, (hi * n as f64) as usize);
    p[a.max(1)..b].iter().sum::<f64>() / (b - a.max(1)) as f64
}

#[test]
fn ratio_examples() {
    assert!((compute_f0_ratio(100f64.ln(), 200f64.ln()).unwrap().value() - 2.0).abs() < 1e-12);
    assert_eq!(compute_f0_ratio(4.2, 4.2).unwrap().value(), 1.0);
    assert!((compute_f0_ratio(220f64.ln(), 110f64.ln()).unwrap().value() - 0.5).abs() < 1e-12);
    assert!(compute_f0_ratio(f64::NAN, 1.0).is_err());
    assert!(compute_f0_ratio(0.0, 3.0).is_err());
}

#[test]
fn wsola_identity_is_verbatim() {
    let x = wave(white_noise(5000, 1.0, 1));
    assert_eq!(wsola(&x, F0Ratio::identity()).unwrap(), x);
}

#[test]
fn wsola_doubles_one_second() {
    let x = speech_like(1.0, 130.0, 2, 8000.0);
    let y = wsola(&x, ratio(2.0)).unwrap();
    let tol = (0.025 * RATE as f64) as usize;
    assert!(y.len().abs_diff(2 * RATE as usize) <= tol, "{}", y.len());
}

#[test]
fn wsola_keeps_pitch() {
    let x = wave(sine(RATE as usize, 440.0, 1.0, RATE));
    let y = wsola(&x, ratio(1.5)).unwrap();
    let f = dominant_frequency(y.samples(), RATE);
    assert!((f - 440.0).abs() <= 5.0, "{f}");
}

#[test]
fn wsola_rejects_short_input() {
    assert!(wsola(&wave(vec![0.0; 1000]), ratio(1.5)).is_err());
}

#[test]
fn zero_stuff_examples() {
    let y = zero_stuff(&wave(vec![1.0, 2.0, 3.0]));
    assert_eq!(y.samples(), &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
    assert_eq!(y.sample_rate(), 2 * RATE);
    assert!(zero_stuff(&wave(vec![])).is_empty());
}

#[test]
fn zero_stuffed_spectrum_mirrors_about_old_nyquist() {
    let x = white_noise(1000, 1.0, 4);
    let y = zero_stuff(&wave(x));
    let spec = real_fft(y.samples(), y.len());
    // old Nyquist sits at bin n/2 of the 2n-point transform
    let half = y.len() / 4;
    let scale = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for j in 0..=half {
        let (a, b) = (spec[half + j], spec[half - j]);
        assert!((a - b.conj()).norm() <= 1e-9 * scale, "bin offset {j}");
    }
}

#[test]
fn resample_identity() {
    let x = speech_like(0.5, 150.0, 1, 8000.0);
    let y = resample(&x, F0Ratio::identity());
    assert_eq!(y.len(), x.len());
    let err = rms(&x.samples().iter().zip(y.samples()).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!(err < 1e-6 * rms(x.samples()));
}

#[test]
fn resample_doubles_frequency() {
    let x = wave(sine(RATE as usize, 100.0, 1.0, RATE));
    let y = resample(&x, ratio(2.0));
    assert!(y.len().abs_diff(x.len() / 2) <= 1);
    assert_eq!(y.sample_rate(), RATE);
    let f = dominant_frequency(y.samples(), RATE);
    assert!((f - 200.0).abs() <= 2.0, "{f}");
}

/// White noise low-passed to the lower half band with a long FFT brick wall.
fn half_band_noise(n: usize, seed: u64) -> Vec<f64> {
    let x = white_noise(n, 1.0, seed);
    let mut spec = real_fft(&x, n);
    for (k, c) in spec.iter_mut().enumerate() {
        if k.min(n - k) > n / 4 {
            *c = 0.0.into();
        }
    }
    ifft(&spec).iter().map(|c| c.re).collect()
}

#[test]
fn folding_then_resampling_fills_the_high_band() {
    let x = wave(half_band_noise(1 << 15, 7));
    let before = welch(x.samples(), 512);
    assert!(band_power(&before, 0.55, 0.95) < 1e-6 * band_power(&before, 0.05, 0.45));
    let folded = zero_stuff(&x);
    let y = f0_transform_residual(&x, ratio(0.5)).unwrap();
    assert_eq!(folded.len(), 2 * x.len());
    // content moves to [0, 1/4] of the band and its mirror to [3/4, 1]
    let after = welch(y.samples(), 512);
    let low = band_power(&after, 0.05, 0.2);
    let gap = band_power(&after, 0.3, 0.7);
    let high = band_power(&after, 0.8, 0.95);
    assert!(to_db(high / low).abs() < 3.0, "mirrored band {high} vs {low}");
    assert!(gap < 1e-3 * low, "gap {gap} vs {low}");
}

#[test]
fn half_ratio_on_full_band_noise_balances_bands() {
    let x = wave(white_noise(1 << 15, 1.0, 8));
    let y = f0_transform_residual(&x, ratio(0.5)).unwrap();
    let p = welch(y.samples(), 512);
    let below = band_power(&p, 0.02, 0.48);
    let above = band_power(&p, 0.52, 0.98);
    assert!(to_db(above / below).abs() < 3.0, "{} dB", to_db(above / below));
    assert!(p[p.len() - 3] > 0.0);
}

#[test]
fn doubling_a_pulse_train() {
    let x = wave(pulse_train(RATE as usize, RATE, |_| 150.0));
    let y = f0_transform_residual(&x, ratio(2.0)).unwrap();
    let f = fundamental(y.samples(), RATE, 60.0, 600.0);
    assert!((f - 300.0).abs() <= 5.0, "{f}");
}

#[test]
fn compensation_examples() {
    let x = wave(vec![2.0]);
    assert_eq!(compensate_residual_power(&x, ratio(4.0)).samples(), &[1.0]);
    assert_eq!(compensate_residual_power(&x, F0Ratio::identity()), x);
    let y = f0_transform_residual(&wave(white_noise(3000, 1.0, 2)), F0Ratio::identity()).unwrap();
    assert_eq!(y.len(), 3000);
}

#[test]
fn residual_power_after_transformation() {
    let x = wave(white_noise(1 << 15, 1.0, 12));
    let p0 = power(&x) / x.len() as f64;
    // lowering: the folded band restores the full per-sample power
    let down = f0_transform_residual(&x, ratio(0.5)).unwrap();
    let p_down = power(&down) / down.len() as f64;
    assert!((p_down / p0 - 1.0).abs() < 0.1, "{}", p_down / p0);
    // raising: the anti-alias filter keeps half the band and compensation
    // halves the rest
    let up = f0_transform_residual(&x, ratio(2.0)).unwrap();
    let p_up = power(&up) / up.len() as f64;
    assert!((p_up / p0 - 0.25).abs() < 0.025, "{}", p_up / p0);
}

#[test]
fn pitch_contract_through_flat_inverse_filter() {
    for f in [110.0, 150.0] {
        for r in [0.5, 0.75, 1.5, 2.0] {
            let x = wave(pulse_train(RATE as usize, RATE, |_| f));
            let stretched = wsola(&x, ratio(r)).unwrap();
            let shift = 110;
            let frames = stretched.len() / shift;
            let flat = MelCepstrumSequence::new(vec![vec![0.0; 36]; frames], 0.455, 0.005, RATE).unwrap();
            let res = inverse_filter(&stretched, &flat).unwrap();
            let y = f0_transform_residual(&res, ratio(r)).unwrap();
            let got = fundamental(y.samples(), RATE, 40.0, 700.0);
            assert!((got / (r * f) - 1.0).abs() < 0.05, "f {f} r {r}: {got}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn length_contract(r in 0.25f64..=4.0, len in 200usize..5000, seed in 0u64..100) {
        let x = wave(white_noise(len, 1.0, seed));
        let y = f0_transform_residual(&x, ratio(r)).unwrap();
        let expected = (len as f64 / r).round() as usize;
        prop_assert!(y.len().abs_diff(expected) <= 1);
        prop_assert_eq!(y.sample_rate(), RATE);
    }

    #[test]
    fn compensation_scales_power_by_inverse_ratio(r in 0.25f64..=4.0, seed in 0u64..100) {
        let x = wave(white_noise(500, 3.0, seed));
        let y = compensate_residual_power(&x, ratio(r));
        prop_assert!((power(&y) - power(&x) / r).abs() <= 1e-12 * power(&x) / r);
    }

    #[test]
    fn wsola_length_follows_ratio(r in 0.25f64..=4.0, len in 2300usize..20000) {
        let x = wave(white_noise(len, 1.0, 1));
        let y = wsola(&x, ratio(r)).unwrap();
        prop_assert_eq!(y.len(), (r * len as f64).round() as usize);
    }
}
