//! 16-bit mono PCM WAV files. Samples keep the int16 scale: a stored value
//! of 16384 reads as 16384.0.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use hound::{SampleFormat, WavSpec};
use resvc_core::Waveform;

use crate::error::{format_at, io_at, Error, Result};

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let file = File::open(path).map_err(io_at(path))?;
    let reader = hound::WavReader::new(BufReader::new(file)).map_err(|e| hound_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int {
        return Err(format_at(path, "audio format", "expected integer PCM, found floating point"));
    }
    if spec.bits_per_sample != 16 {
        return Err(format_at(
            path,
            "bits per sample",
            format!("expected 16, found {}", spec.bits_per_sample),
        ));
    }
    if spec.channels != 1 {
        return Err(format_at(path, "channels", format!("expected 1, found {}", spec.channels)));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(f64::from))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| hound_error(path, e))?;
    Ok(Waveform::new(samples, spec.sample_rate)?)
}

/// Rounds half to even and clamps to the int16 range.
pub fn to_pcm(v: f64) -> i16 {
    v.round_ties_even().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn write_wav(w: &Waveform, path: &Path) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let file = File::create(path).map_err(io_at(path))?;
    let mut writer = hound::WavWriter::new(BufWriter::new(file), spec).map_err(|e| hound_error(path, e))?;
    for &s in w.samples() {
        writer.write_sample(to_pcm(s)).map_err(|e| hound_error(path, e))?;
    }
    writer.finalize().map_err(|e| hound_error(path, e))
}

fn hound_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) => io_at(path)(source),
        hound::Error::FormatError(msg) => format_at(path, "header", msg),
        hound::Error::Unsupported => format_at(path, "audio format", "unsupported encoding"),
        hound::Error::TooWide => format_at(path, "bits per sample", "wider than 16"),
        hound::Error::UnfinishedSample => format_at(path, "data", "truncated sample"),
        hound::Error::InvalidSampleFormat => format_at(path, "audio format", "not 16-bit integer PCM"),
    }
}
