//! Spectral conversion, GV postfiltering and speaker statistics.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{F0Contour, MelCepstrumSequence, F0_RANGE};
use crate::dsp::{mean, variance};
use crate::error::{Error, Result};

/// Minimum number of voiced frames needed for usable log-F0 statistics.
pub const MIN_VOICED_FRAMES: usize = 10;

/// Per-speaker statistics: log-F0 moments over voiced frames, pooled
/// per-dimension mel-cepstrum moments, and the global variance (the mean
/// over utterances of each utterance's per-dimension variance).
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerStats {
    pub logf0_mean: f64,
    pub logf0_var: f64,
    pub mcep_mean: Vec<f64>,
    pub mcep_var: Vec<f64>,
    pub gv: Vec<f64>,
}

impl SpeakerStats {
    /// Checks shapes and signs. `gv[0]` is carried along but never used.
    pub fn validate(&self) -> Result<()> {
        let dim = self.mcep_mean.len();
        if dim < 2 || self.mcep_var.len() != dim || self.gv.len() != dim {
            return Err(Error::Statistics(alloc::format!(
                "inconsistent dimensions: mcep_mean {}, mcep_var {}, gv {}",
                dim,
                self.mcep_var.len(),
                self.gv.len()
            )));
        }
        if !self.logf0_mean.is_finite() || !(self.logf0_var >= 0.0) {
            return Err(Error::Statistics("log-F0 moments invalid".into()));
        }
        if let Some(d) = self.mcep_var.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Statistics(alloc::format!("mcep variance of dimension {d} is negative or non-finite")));
        }
        if let Some(d) = self.gv.iter().skip(1).position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Statistics(alloc::format!("GV of dimension {} is not positive", d + 1)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mcep_mean.len()
    }
}

/// A spectral conversion model. Implementations map a sequence extracted
/// from normal (not F0-transformed) speech to the target speaker's features
/// and must keep frame count, order and metadata.
pub trait SpectralConverter {
    fn convert(&self, features: &MelCepstrumSequence) -> Result<MelCepstrumSequence>;
}

impl<C: SpectralConverter + ?Sized> SpectralConverter for &C {
    fn convert(&self, features: &MelCepstrumSequence) -> Result<MelCepstrumSequence> {
        (**self).convert(features)
    }
}

impl<C: SpectralConverter + ?Sized> SpectralConverter for Box<C> {
    fn convert(&self, features: &MelCepstrumSequence) -> Result<MelCepstrumSequence> {
        (**self).convert(features)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityConverter;

impl SpectralConverter for IdentityConverter {
    fn convert(&self, features: &MelCepstrumSequence) -> Result<MelCepstrumSequence> {
        Ok(features.clone())
    }
}

pub fn identity_converter() -> IdentityConverter {
    IdentityConverter
}

/// Per-dimension affine map matching source mean/variance to the target's.
/// Dimension 0 (energy) is passed through.
#[derive(Debug, Clone)]
pub struct MeanVarianceConverter {
    shift_in: Vec<f64>,
    scale: Vec<f64>,
    shift_out: Vec<f64>,
}

impl MeanVarianceConverter {
    pub fn new(src: &SpeakerStats, tgt: &SpeakerStats) -> Result<Self> {
        if src.dim() != tgt.dim() {
            return Err(Error::Statistics(alloc::format!(
                "source and target stats differ in dimension ({} vs {})",
                src.dim(),
                tgt.dim()
            )));
        }
        let mut scale = vec![1.0; src.dim()];
        for d in 1..src.dim() {
            if !(src.mcep_var[d] > 0.0) {
                return Err(Error::Statistics(alloc::format!(
                    "source variance of dimension {d} is zero"
                )));
            }
            scale[d] = libm::sqrt(tgt.mcep_var[d] / src.mcep_var[d]);
        }
        Ok(Self {
            shift_in: src.mcep_mean.clone(),
            scale,
            shift_out: tgt.mcep_mean.clone(),
        })
    }
}

impl SpectralConverter for MeanVarianceConverter {
    fn convert(&self, features: &MelCepstrumSequence) -> Result<MelCepstrumSequence> {
        if features.dim() != self.scale.len() {
            return Err(Error::Alignment {
                what: "feature dimension vs converter statistics",
                expected: self.scale.len(),
                actual: features.dim(),
            });
        }
        let mut out = features.clone();
        for t in 0..out.frame_count() {
            let frame = out.frame_mut(t);
            for d in 1..frame.len() {
                frame[d] = (frame[d] - self.shift_in[d]) * self.scale[d] + self.shift_out[d];
            }
        }
        Ok(out)
    }
}

pub fn mean_variance_converter(src: &SpeakerStats, tgt: &SpeakerStats) -> Result<MeanVarianceConverter> {
    MeanVarianceConverter::new(src, tgt)
}

/// Result of [`gv_postfilter`].
#[derive(Debug, Clone, PartialEq)]
pub struct Postfiltered {
    pub features: MelCepstrumSequence,
    /// Dimensions left untouched because their track was constant.
    pub skipped: Vec<usize>,
}

/// Global-variance postfilter over the whole utterance.
///
/// For each dimension `d >= 1` the track is scaled about its mean so that its
/// variance becomes `target_gv[d]`. Constant tracks are skipped with a
/// warning.
pub fn gv_postfilter(m: &MelCepstrumSequence, target_gv: &[f64]) -> Result<Postfiltered> {
    if m.frame_count() < 2 {
        return Err(Error::InsufficientData {
            what: "GV postfilter (frames)",
            needed: 2,
            got: m.frame_count(),
        });
    }
    if target_gv.len() != m.dim() {
        return Err(Error::Alignment {
            what: "GV dimension vs feature dimension",
            expected: m.dim(),
            actual: target_gv.len(),
        });
    }
    if let Some(d) = (1..m.dim()).find(|&d| !(target_gv[d] > 0.0)) {
        return Err(Error::Statistics(alloc::format!("target GV of dimension {d} is not positive")));
    }
    let mut out = m.clone();
    let mut skipped = Vec::new();
    for d in 1..m.dim() {
        let track = m.track(d);
        let mu = mean(&track);
        let var = variance(&track);
        if var <= 1e-24 * (1.0 + mu * mu) {
            log::warn!("GV postfilter: dimension {d} has a constant track; left unchanged");
            skipped.push(d);
            continue;
        }
        let gain = libm::sqrt(target_gv[d] / var);
        for (t, v) in track.iter().enumerate() {
            out.frame_mut(t)[d] = gain * (v - mu) + mu;
        }
    }
    Ok(Postfiltered {
        features: out,
        skipped,
    })
}

/// Pools statistics over `(features, F0)` pairs.
pub fn collect_stats(utterances: &[(MelCepstrumSequence, F0Contour)]) -> Result<SpeakerStats> {
    let Some((first, _)) = utterances.first() else {
        return Err(Error::Statistics("no utterances".into()));
    };
    let dim = first.dim();
    if let Some(i) = utterances.iter().position(|(m, _)| m.dim() != dim) {
        return Err(Error::Statistics(alloc::format!("utterance {i} has a different order")));
    }
    let log_f0: Vec<f64> = utterances
        .iter()
        .flat_map(|(_, f0)| f0.voiced().map(libm::log))
        .collect();
    if log_f0.len() < MIN_VOICED_FRAMES {
        return Err(Error::Statistics(alloc::format!(
            "only {} voiced frames, need at least {MIN_VOICED_FRAMES}",
            log_f0.len()
        )));
    }
    let total_frames: usize = utterances.iter().map(|(m, _)| m.frame_count()).sum();
    if total_frames == 0 {
        return Err(Error::Statistics("no feature frames".into()));
    }

    let mut mcep_mean = vec![0.0; dim];
    let mut mcep_var = vec![0.0; dim];
    let mut gv = vec![0.0; dim];
    for d in 0..dim {
        let pooled: Vec<f64> = utterances.iter().flat_map(|(m, _)| m.track(d)).collect();
        mcep_mean[d] = mean(&pooled);
        mcep_var[d] = variance(&pooled);
        gv[d] = utterances.iter().map(|(m, _)| variance(&m.track(d))).sum::<f64>() / utterances.len() as f64;
    }
    Ok(SpeakerStats {
        logf0_mean: mean(&log_f0),
        logf0_var: variance(&log_f0),
        mcep_mean,
        mcep_var,
        gv,
    })
}

/// Log-domain mean-variance F0 conversion of voiced frames, clamped to the
/// valid F0 range. A zero source variance degrades to a pure mean shift.
pub fn convert_f0_contour(f0: &F0Contour, src: &SpeakerStats, tgt: &SpeakerStats) -> Result<F0Contour> {
    let gain = if src.logf0_var > 0.0 {
        libm::sqrt(tgt.logf0_var / src.logf0_var)
    } else {
        1.0
    };
    let values = f0
        .values()
        .iter()
        .map(|&v| {
            if v > 0.0 {
                let lf = (libm::log(v) - src.logf0_mean) * gain + tgt.logf0_mean;
                libm::exp(lf).clamp(F0_RANGE.0, F0_RANGE.1)
            } else {
                0.0
            }
        })
        .collect();
    F0Contour::new(values, f0.frame_shift_s())
}
