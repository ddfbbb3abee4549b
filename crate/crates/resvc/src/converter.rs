//! Converter backed by a feature file produced outside this toolkit.

use std::path::Path;

use resvc_core::analysis::interpolate_frames;
use resvc_core::convert::SpectralConverter;
use resvc_core::{Error, MelCepstrumSequence};

use crate::features::read_features;

/// Returns pre-computed converted features. When the stored frame count
/// differs from the requested one the stored frames are interpolated.
#[derive(Debug, Clone)]
pub struct FileConverter {
    features: MelCepstrumSequence,
}

impl FileConverter {
    pub fn new(features: MelCepstrumSequence) -> Self {
        Self { features }
    }

    pub fn open(path: &Path, sample_rate: u32) -> crate::Result<Self> {
        Ok(Self::new(read_features(path, sample_rate)?))
    }
}

impl SpectralConverter for FileConverter {
    fn convert(&self, input: &MelCepstrumSequence) -> resvc_core::Result<MelCepstrumSequence> {
        if self.features.dim() != input.dim() {
            return Err(Error::Alignment {
                what: "converted feature dimension",
                expected: input.dim(),
                actual: self.features.dim(),
            });
        }
        let frames = if self.features.frame_count() == input.frame_count() {
            self.features.clone()
        } else {
            log::info!(
                "interpolating {} converted frames to {}",
                self.features.frame_count(),
                input.frame_count()
            );
            interpolate_frames(&self.features, input.frame_count())?
        };
        MelCepstrumSequence::from_flat(
            frames.as_flat().to_vec(),
            input.dim(),
            input.alpha(),
            input.frame_shift_s(),
            input.sample_rate(),
        )
    }
}
