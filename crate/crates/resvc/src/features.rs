//! Binary mel-cepstrum files.
//!
//! Layout, all little-endian: the magic `MCEP1`, `u32` frame count, `u32`
//! coefficients per frame (order + 1), `f64` alpha, `f64` frame shift in
//! seconds, then the frames row-major as `f32`. The sample rate is not
//! stored; readers supply it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use resvc_core::MelCepstrumSequence;

use crate::error::{format_at, io_at, Result};

pub const MAGIC: &[u8; 5] = b"MCEP1";

pub fn encode_features(m: &MelCepstrumSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(29 + m.as_flat().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.frame_count() as u32).to_le_bytes());
    out.extend_from_slice(&(m.dim() as u32).to_le_bytes());
    out.extend_from_slice(&m.alpha().to_le_bytes());
    out.extend_from_slice(&m.frame_shift_s().to_le_bytes());
    for &v in m.as_flat() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn write_features(m: &MelCepstrumSequence, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(io_at(path))?);
    f.write_all(&encode_features(m)).map_err(io_at(path))?;
    f.flush().map_err(io_at(path))
}

pub fn read_features(path: &Path, sample_rate: u32) -> Result<MelCepstrumSequence> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(io_at(path))?)
        .read_to_end(&mut bytes)
        .map_err(io_at(path))?;
    decode_features(&bytes, sample_rate).map_err(|(field, detail)| format_at(path, field, detail))
}

/// Parses an in-memory feature file; errors name the offending field.
pub fn decode_features(bytes: &[u8], sample_rate: u32) -> Result<MelCepstrumSequence, (&'static str, String)> {
    let take = |at: usize, n: usize, field: &'static str| -> Result<&[u8], (&'static str, String)> {
        bytes
            .get(at..at + n)
            .ok_or((field, format!("file ends at byte {} inside this field", bytes.len())))
    };
    if take(0, 5, "magic")? != MAGIC {
        return Err(("magic", "expected MCEP1".into()));
    }
    let frames = u32::from_le_bytes(take(5, 4, "frame count")?.try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(take(9, 4, "coefficient count")?.try_into().unwrap()) as usize;
    let alpha = f64::from_le_bytes(take(13, 8, "alpha")?.try_into().unwrap());
    let shift = f64::from_le_bytes(take(21, 8, "frame shift")?.try_into().unwrap());
    if dim < 2 {
        return Err(("coefficient count", format!("{dim} is below 2")));
    }
    let expected = frames
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or(("frame count", "frame data size overflows".into()))?;
    let body = &bytes[29..];
    if body.len() != expected {
        return Err(("frame data", format!("expected {expected} bytes, found {}", body.len())));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    MelCepstrumSequence::from_flat(data, dim, alpha, shift, sample_rate).map_err(|e| ("header", e.to_string()))
}
