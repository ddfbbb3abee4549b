//! End-to-end conversion of one utterance.
//!
//! Step labels follow the processing chain:
//!
//! | step | operation |
//! |------|-----------|
//! | 1  | WSOLA time scaling of the input by the F0 ratio |
//! | 2  | mel-cepstrum extraction from the time-scaled signal |
//! | 3  | inverse filtering to the residual |
//! | 4  | residual F0 transformation (fold, resample, compensate) |
//! | 5  | feature interpolation back to the output frame count |
//! | 6a | spectral conversion |
//! | 6b | GV postfilter |
//! | 7a | reference vocoder synthesis |
//! | 7b | synthesis filtering with postfiltered features |
//! | 8a | envelope comparison and collapse detection |
//! | 8b | feature substitution |
//! | 9a | final synthesis filtering |
//! | 9b | power normalization to the input |

use alloc::collections::BTreeSet;

use crate::analysis::{
    estimate_f0, extract_mcep_centered, interpolate_frames, F0Contour, MelCepstrumSequence, DEFAULT_ALPHA,
    DEFAULT_FRAME_LENGTH, DEFAULT_FRAME_SHIFT_S, DEFAULT_ORDER,
};
use crate::collapse::{
    detect_collapsed_frames, extract_envelope, substitute_features, EnvelopeSignal, DEFAULT_SLOT_LENGTH,
    DEFAULT_THRESHOLD,
};
use crate::convert::{convert_f0_contour, gv_postfilter, SpeakerStats, SpectralConverter};
use crate::error::{Error, Result};
use crate::f0xform::{f0_transform_residual, wsola, F0Ratio};
use crate::mlsa::{inverse_filter, reference_vocoder, synthesis_filter, DEFAULT_NOISE_SEED};
use crate::signal::{match_power, shift_samples, Waveform};

/// Which spectral converter the caller plugged in. Informational for the
/// core; front ends use it to build the converter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConverterKind {
    #[default]
    Identity,
    MeanVar,
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionConfig {
    pub f0_ratio: F0Ratio,
    pub mcep_order: usize,
    pub alpha: f64,
    pub frame_shift_s: f64,
    pub frame_length: usize,
    pub collapse_threshold: f64,
    pub slot_length: usize,
    pub use_gv: bool,
    pub converter_kind: ConverterKind,
    /// Seed of the reference vocoder's noise excitation.
    pub seed: u64,
    /// F0 search range of the estimator (Hz).
    pub f0_floor: f64,
    pub f0_ceil: f64,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        Self {
            f0_ratio: F0Ratio::identity(),
            mcep_order: DEFAULT_ORDER,
            alpha: DEFAULT_ALPHA,
            frame_shift_s: DEFAULT_FRAME_SHIFT_S,
            frame_length: DEFAULT_FRAME_LENGTH,
            collapse_threshold: DEFAULT_THRESHOLD,
            slot_length: DEFAULT_SLOT_LENGTH,
            use_gv: true,
            converter_kind: ConverterKind::Identity,
            seed: DEFAULT_NOISE_SEED,
            f0_floor: 50.0,
            f0_ceil: 600.0,
        }
    }
}

/// Every intermediate artifact of one conversion run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTrace {
    pub sig_wx: Waveform,
    pub res_wx: Waveform,
    pub res_y: Waveform,
    pub mcp_wx: MelCepstrumSequence,
    pub mcp_y: MelCepstrumSequence,
    pub mcp_y_gv: MelCepstrumSequence,
    pub mcp_y_sub: MelCepstrumSequence,
    pub env_w: EnvelopeSignal,
    pub env_gv: EnvelopeSignal,
    pub flagged: BTreeSet<usize>,
    pub sig_y_w: Waveform,
    pub sig_y_gv: Waveform,
    pub sig_y_sub: Waveform,
}

impl PipelineTrace {
    /// Trace keys, in processing order.
    pub const KEYS: [&'static str; 13] = [
        "sig_wx",
        "mcp_wx",
        "res_wx",
        "res_y",
        "mcp_y",
        "mcp_y_GV",
        "sig_y_W",
        "sig_y_GV",
        "env_W",
        "env_GV",
        "flagged",
        "mcp_y_SUB",
        "sig_y_SUB",
    ];
}

/// Converts `x`, estimating the source F0 contour for the reference vocoder.
pub fn convert_utterance<C: SpectralConverter + ?Sized>(
    x: &Waveform,
    cfg: &ConversionConfig,
    converter: &C,
    src_stats: &SpeakerStats,
    tgt_stats: &SpeakerStats,
) -> Result<(Waveform, PipelineTrace)> {
    convert_utterance_with_f0(x, None, cfg, converter, src_stats, tgt_stats)
}

/// Converts `x`; `source_f0`, when given, replaces the estimated contour.
pub fn convert_utterance_with_f0<C: SpectralConverter + ?Sized>(
    x: &Waveform,
    source_f0: Option<&F0Contour>,
    cfg: &ConversionConfig,
    converter: &C,
    src_stats: &SpeakerStats,
    tgt_stats: &SpeakerStats,
) -> Result<(Waveform, PipelineTrace)> {
    if x.is_empty() {
        return Err(Error::InsufficientData {
            what: "input waveform (samples)",
            needed: 1,
            got: 0,
        });
    }
    src_stats.validate().map_err(|e| e.at("stats (source)"))?;
    tgt_stats.validate().map_err(|e| e.at("stats (target)"))?;
    let ratio = cfg.f0_ratio;
    let rate = x.sample_rate();
    let shift = shift_samples(cfg.frame_shift_s, rate);

    let sig_wx = wsola(x, ratio).map_err(|e| e.at("1"))?;
    let mcp_wx = extract_mcep_centered(&sig_wx, cfg.mcep_order, cfg.alpha, cfg.frame_shift_s, cfg.frame_length)
        .map_err(|e| e.at("2"))?;
    let res_wx = inverse_filter(&sig_wx, &mcp_wx).map_err(|e| e.at("3"))?;
    let res_y = f0_transform_residual(&res_wx, ratio).map_err(|e| e.at("4"))?;

    let frame_count = (libm::round(res_y.len() as f64 / shift as f64) as usize).max(2);
    let mcp_i = interpolate_frames(&mcp_wx, frame_count).map_err(|e| e.at("5"))?;

    let mut mcp_y = converter.convert(&mcp_i).map_err(|e| e.at("6a"))?;
    if !mcp_y.same_shape(&mcp_i) {
        return Err(Error::Alignment {
            what: "converter output frames",
            expected: mcp_i.frame_count(),
            actual: mcp_y.frame_count(),
        }
        .at("6a"));
    }
    // energy is never converted
    for t in 0..mcp_y.frame_count() {
        mcp_y.frame_mut(t)[0] = mcp_i.frame(t)[0];
    }

    let mcp_y_gv = if cfg.use_gv {
        gv_postfilter(&mcp_y, &tgt_stats.gv).map_err(|e| e.at("6b"))?.features
    } else {
        mcp_y.clone()
    };

    let f0_src = match source_f0 {
        Some(f0) => f0.clone(),
        None => estimate_f0(x, cfg.frame_shift_s, cfg.f0_floor, cfg.f0_ceil).map_err(|e| e.at("7a"))?,
    };
    let f0_y = convert_f0_contour(&f0_src, src_stats, tgt_stats)
        .map_err(|e| e.at("7a"))?
        .resample_frames(frame_count);
    let sig_y_w = reference_vocoder(&mcp_y_gv, &f0_y, rate, cfg.seed).map_err(|e| e.at("7a"))?;
    let sig_y_gv = synthesis_filter(&res_y, &mcp_y_gv).map_err(|e| e.at("7b"))?;

    let env_w = extract_envelope(&sig_y_w, cfg.slot_length).map_err(|e| e.at("8a"))?;
    let env_gv = extract_envelope(&sig_y_gv, cfg.slot_length).map_err(|e| e.at("8a"))?;
    // without a postfilter there is nothing to fall back to
    let flagged = if cfg.use_gv {
        detect_collapsed_frames(&env_w, &env_gv, cfg.collapse_threshold, shift, frame_count)
            .map_err(|e| e.at("8a"))?
    } else {
        BTreeSet::new()
    };
    if !flagged.is_empty() {
        log::info!("{} of {} frames flagged as collapsed", flagged.len(), frame_count);
    }
    let mcp_y_sub = substitute_features(&mcp_y_gv, &mcp_y, &flagged).map_err(|e| e.at("8b"))?;

    let sig_y_sub = synthesis_filter(&res_y, &mcp_y_sub).map_err(|e| e.at("9a"))?;
    let output = match_power(&sig_y_sub, x).map_err(|e| e.at("9b"))?;

    let trace = PipelineTrace {
        sig_wx,
        res_wx,
        res_y,
        mcp_wx,
        mcp_y,
        mcp_y_gv,
        mcp_y_sub,
        env_w,
        env_gv,
        flagged,
        sig_y_w,
        sig_y_gv,
        sig_y_sub,
    };
    Ok((output, trace))
}
