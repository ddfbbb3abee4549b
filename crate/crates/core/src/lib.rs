//! Vocoder-free waveform generation for voice conversion.
//!
//! The input waveform is time-scaled with WSOLA, inverse-filtered with its own
//! mel-cepstrum to obtain a residual, pitch-shifted in the residual domain by
//! resampling (with spectral folding when the pitch is lowered), and finally
//! synthesis-filtered with converted mel-cepstra. Frames whose GV-postfiltered
//! synthesis collapses are detected by envelope comparison against a simple
//! pulse/noise vocoder and re-synthesized from the un-postfiltered features.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, WAV I/O and the
//! command-line front end live in the `resvc` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod dsp;
mod error;
mod fft;

pub mod analysis;
pub mod collapse;
pub mod convert;
pub mod f0xform;
pub mod mlsa;
pub mod pipeline;
pub mod signal;

pub use analysis::{F0Contour, MelCepstrumSequence};
pub use collapse::EnvelopeSignal;
pub use convert::{IdentityConverter, MeanVarianceConverter, SpeakerStats, SpectralConverter};
pub use error::{Error, Result};
pub use f0xform::F0Ratio;
pub use mlsa::MlsaFilter;
pub use pipeline::{convert_utterance, ConversionConfig, ConverterKind, PipelineTrace};
pub use signal::Waveform;
