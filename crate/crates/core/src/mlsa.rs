//! Mel log spectrum approximation (MLSA) filtering.
//!
//! The filter realizes `H(z) = exp(sum_m c_m z~^-m)` with the all-pass warped
//! delay `z~^-1 = (z^-1 - alpha) / (1 - alpha z^-1)`. The exponential is
//! approximated by a Padé rational function, applied in two cascaded stages:
//! the first handles the `b_1` term alone, the second the remaining terms.
//! `c_0` becomes a plain gain.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::{F0Contour, MelCepstrumSequence};
use crate::error::{Error, Result};
use crate::signal::Waveform;

pub const DEFAULT_PADE_ORDER: usize = 5;

/// Largest exponent magnitude `|F(e^jw)|` per filter stage for which the
/// order-5 Padé approximation of `exp(F)` stays stable.
pub const PADE_EXPONENT_LIMIT: f64 = 6.0;

/// Largest allowed mismatch between excitation length and `T * shift`.
pub const MAX_ALIGNMENT_SLACK_S: f64 = 0.1;

pub const DEFAULT_NOISE_SEED: u64 = 0x5eed;

const PADE_4: [f64; 5] = [1.0, 0.4999273, 0.1067005, 0.01170221, 0.0005656279];
const PADE_5: [f64; 6] = [1.0, 0.4999391, 0.1107098, 0.01369984, 0.0009564853, 0.00003041721];

/// Delay-line state of one MLSA filter.
#[derive(Debug, Clone)]
pub struct MlsaFilter {
    order: usize,
    alpha: f64,
    pade: &'static [f64],
    // first stage: pade+1 delays followed by pade+1 stage outputs
    stage1: Vec<f64>,
    // second stage: pade FIR delay lines of length order+2 each
    stage2: Vec<f64>,
    stage2_out: Vec<f64>,
}

impl MlsaFilter {
    pub fn new(order: usize, alpha: f64, pade_order: usize) -> Result<Self> {
        let pade: &'static [f64] = match pade_order {
            4 => &PADE_4,
            5 => &PADE_5,
            _ => {
                return Err(Error::Configuration(alloc::format!(
                    "unsupported Padé order {pade_order} (4 or 5)"
                )))
            }
        };
        if order < 1 {
            return Err(Error::Configuration("MLSA order must be at least 1".into()));
        }
        Ok(Self {
            order,
            alpha,
            pade,
            stage1: vec![0.0; 2 * (pade_order + 1)],
            stage2: vec![0.0; pade_order * (order + 2)],
            stage2_out: vec![0.0; pade_order + 1],
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pade_order(&self) -> usize {
        self.pade.len() - 1
    }

    pub fn reset(&mut self) {
        self.stage1.fill(0.0);
        self.stage2.fill(0.0);
        self.stage2_out.fill(0.0);
    }

    pub fn is_reset(&self) -> bool {
        self.stage1.iter().chain(&self.stage2).chain(&self.stage2_out).all(|&v| v == 0.0)
    }

    /// Filters one sample with filter coefficients `b` (see [`mcep_to_b`]).
    pub fn process(&mut self, x: f64, b: &[f64]) -> f64 {
        debug_assert_eq!(b.len(), self.order + 1);
        let x = x * libm::exp(b[0]);
        let x = self.first_stage(x, b[1]);
        self.second_stage(x, b)
    }

    /// Like [`process`](Self::process) with the stages applied in reverse
    /// order (second stage, first stage, gain). With negated coefficients this
    /// undoes `process` exactly, even while the coefficients change.
    pub fn process_reversed(&mut self, x: f64, b: &[f64]) -> f64 {
        debug_assert_eq!(b.len(), self.order + 1);
        let x = self.second_stage(x, b);
        let x = self.first_stage(x, b[1]);
        x * libm::exp(b[0])
    }

    fn first_stage(&mut self, mut x: f64, b1: f64) -> f64 {
        let pd = self.pade.len() - 1;
        let a = self.alpha;
        let aa = 1.0 - a * a;
        let (d, pt) = self.stage1.split_at_mut(pd + 1);
        let mut out = 0.0;
        for i in (1..=pd).rev() {
            d[i] = aa * pt[i - 1] + a * d[i];
            pt[i] = d[i] * b1;
            let v = pt[i] * self.pade[i];
            x += if i & 1 == 1 { v } else { -v };
            out += v;
        }
        pt[0] = x;
        out + x
    }

    fn second_stage(&mut self, mut x: f64, b: &[f64]) -> f64 {
        let pd = self.pade.len() - 1;
        let m = self.order;
        let mut out = 0.0;
        for i in (1..=pd).rev() {
            let input = self.stage2_out[i - 1];
            let d = &mut self.stage2[(i - 1) * (m + 2)..i * (m + 2)];
            self.stage2_out[i] = warped_fir(input, b, self.alpha, d);
            let v = self.stage2_out[i] * self.pade[i];
            x += if i & 1 == 1 { v } else { -v };
            out += v;
        }
        self.stage2_out[0] = x;
        out + x
    }
}

/// All-pass-chain FIR over `b_2..b_M`; `d` has length `M + 2`.
fn warped_fir(x: f64, b: &[f64], alpha: f64, d: &mut [f64]) -> f64 {
    let m = b.len() - 1;
    let aa = 1.0 - alpha * alpha;
    d[0] = x;
    d[1] = aa * d[0] + alpha * d[1];
    for i in 2..=m {
        d[i] += alpha * (d[i + 1] - d[i - 1]);
    }
    let y = (2..=m).map(|i| d[i] * b[i]).sum();
    for i in (2..=m + 1).rev() {
        d[i] = d[i - 1];
    }
    y
}

/// Converts mel-cepstrum to MLSA filter coefficients: `b_M = c_M`,
/// `b_m = c_m - alpha * b_{m+1}`.
pub fn mcep_to_b(c: &[f64], alpha: f64) -> Vec<f64> {
    let mut b = c.to_vec();
    for m in (0..b.len() - 1).rev() {
        b[m] = c[m] - alpha * b[m + 1];
    }
    b
}

/// Largest magnitude of the exponent handled by each Padé stage: the first
/// stage sees `b_1 * Phi_1` (bounded by `(1 + alpha) |b_1|`), the second the
/// all-pass chain over `b_2..b_M`, evaluated on a frequency grid.
fn stage_exponent_peak(b: &[f64], alpha: f64) -> f64 {
    const GRID: usize = 64;
    let first = (1.0 + alpha) * b[1].abs();
    let mut second: f64 = 0.0;
    for i in 0..=GRID {
        let omega = core::f64::consts::PI * i as f64 / GRID as f64;
        let z_inv = Complex64::from_polar(1.0, -omega);
        // Phi_1 = (1 - a^2) z^-1 / (1 - a z^-1); Phi_m = Phi_1 * allpass^(m-1)
        let phi1 = z_inv * (1.0 - alpha * alpha) / (1.0 - alpha * z_inv);
        let allpass = (z_inv - alpha) / (1.0 - alpha * z_inv);
        let mut phi = phi1 * allpass;
        let mut f = Complex64::new(0.0, 0.0);
        for &bm in &b[2..] {
            f += phi * bm;
            phi *= allpass;
        }
        second = second.max(f.norm());
    }
    first.max(second)
}

/// Per-frame filter coefficients after the Padé stability guard.
fn filter_coefficients(m: &MelCepstrumSequence, negate: bool) -> Vec<Vec<f64>> {
    let alpha = m.alpha();
    m.frames()
        .enumerate()
        .map(|(t, frame)| {
            let sign = if negate { -1.0 } else { 1.0 };
            let mut c: Vec<f64> = frame.iter().map(|v| sign * v).collect();
            let peak = stage_exponent_peak(&mcep_to_b(&c, alpha), alpha);
            if peak > PADE_EXPONENT_LIMIT {
                log::warn!("frame {t}: filter exponent magnitude {peak:.2} exceeds the Padé limit; clamping");
                let k = PADE_EXPONENT_LIMIT / peak;
                c[1..].iter_mut().for_each(|v| *v *= k);
            }
            mcep_to_b(&c, alpha)
        })
        .collect()
}

fn check_alignment(len: usize, m: &MelCepstrumSequence) -> Result<()> {
    let expected = m.frame_count() * m.shift_samples();
    let slack = libm::round(MAX_ALIGNMENT_SLACK_S * m.sample_rate() as f64) as usize;
    if len.abs_diff(expected) > slack {
        return Err(Error::Alignment {
            what: "excitation samples vs frames * shift",
            expected,
            actual: len,
        });
    }
    Ok(())
}

fn run_filter(x: &Waveform, m: &MelCepstrumSequence, negate: bool) -> Result<Waveform> {
    check_alignment(x.len(), m)?;
    if x.is_empty() || m.frame_count() == 0 {
        return Ok(Waveform::from_parts(vec![0.0; x.len()], x.sample_rate()));
    }
    let coefs = filter_coefficients(m, negate);
    let count = coefs.len();
    let shift = m.shift_samples() as f64;
    // frame grid centered within the signal
    let offset = (x.len() as f64 - (count - 1) as f64 * shift) / 2.0;
    let mut filter = MlsaFilter::new(m.order(), m.alpha(), DEFAULT_PADE_ORDER)?;
    let mut b = vec![0.0; m.dim()];
    let out = x
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &s)| {
            let pos = ((n as f64 - offset) / shift).clamp(0.0, (count - 1) as f64);
            let lo = (libm::floor(pos) as usize).min(count.saturating_sub(2));
            let frac = pos - lo as f64;
            if count == 1 {
                b.copy_from_slice(&coefs[0]);
            } else {
                for ((bi, &p), &q) in b.iter_mut().zip(&coefs[lo]).zip(&coefs[lo + 1]) {
                    *bi = (1.0 - frac) * p + frac * q;
                }
            }
            if negate {
                filter.process_reversed(s, &b)
            } else {
                filter.process(s, &b)
            }
        })
        .collect::<Vec<f64>>();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSignal("MLSA filter output diverged"));
    }
    Ok(Waveform::from_parts(out, x.sample_rate()))
}

/// Time-varying synthesis filtering of `excitation` with the mel-cepstra in
/// `m`. Frames are laid on a grid of `m`'s shift centered in the excitation,
/// and filter coefficients are interpolated linearly between frames for every
/// sample.
pub fn synthesis_filter(excitation: &Waveform, m: &MelCepstrumSequence) -> Result<Waveform> {
    run_filter(excitation, m, false)
}

/// Inverse filtering, i.e. synthesis filtering with negated cepstra. The
/// filter stages run in reverse order so that [`synthesis_filter`] undoes this
/// exactly with time-varying coefficients too.
pub fn inverse_filter(signal: &Waveform, m: &MelCepstrumSequence) -> Result<Waveform> {
    run_filter(signal, m, true)
}

/// Minimal pulse/noise vocoder: unit-power pulse trains for voiced frames,
/// unit-variance Gaussian noise (seeded) for unvoiced ones, shaped by
/// [`synthesis_filter`]. Produces `T * shift` samples.
pub fn reference_vocoder(m: &MelCepstrumSequence, f0: &F0Contour, rate: u32, seed: u64) -> Result<Waveform> {
    if m.frame_count() != f0.len() {
        return Err(Error::Alignment {
            what: "F0 frames vs mel-cepstrum frames",
            expected: m.frame_count(),
            actual: f0.len(),
        });
    }
    if rate != m.sample_rate() {
        return Err(Error::Configuration(alloc::format!(
            "vocoder rate {rate} differs from feature rate {}",
            m.sample_rate()
        )));
    }
    let shift = m.shift_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut excitation = Vec::with_capacity(f0.len() * shift);
    // phase in periods; a pulse fires whenever it wraps
    let mut phase = 1.0;
    for &hz in f0.values() {
        for _ in 0..shift {
            if hz > 0.0 {
                let period = rate as f64 / hz;
                phase += 1.0 / period;
                if phase >= 1.0 {
                    phase -= libm::floor(phase);
                    excitation.push(libm::sqrt(period));
                } else {
                    excitation.push(0.0);
                }
            } else {
                phase = 1.0;
                let v: f64 = StandardNormal.sample(&mut rng);
                excitation.push(v);
            }
        }
    }
    let excitation = Waveform::from_parts(excitation, rate);
    synthesis_filter(&excitation, m)
}
