//! Writes every intermediate artifact of a conversion run into a directory.
//!
//! | key | file |
//! |-----|------|
//! | `sig_*` | 16-bit WAV |
//! | `res_*` | raw little-endian `f32` samples (`.f32`) |
//! | `mcp_*` | MCEP1 feature file (`.mcep`) |
//! | `env_*` | two-column text (`.txt`) |
//! | `flagged` | one frame index per line (`.txt`) |

use std::fs;
use std::path::{Path, PathBuf};

use resvc_core::{PipelineTrace, Waveform};

use crate::error::{io_at, Result};
use crate::features::write_features;
use crate::text::{write_envelope, write_flagged};
use crate::wav::write_wav;

/// File name used for a trace key.
pub fn file_name(key: &str) -> String {
    let ext = match key.split('_').next() {
        Some("sig") => "wav",
        Some("res") => "f32",
        Some("mcp") => "mcep",
        _ => "txt",
    };
    format!("{key}.{ext}")
}

fn write_raw(w: &Waveform, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = w.samples().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
    fs::write(path, bytes).map_err(io_at(path))
}

/// Dumps all trace keys into `dir` (created if missing) and returns the
/// written paths in key order.
pub fn write_trace(trace: &PipelineTrace, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let mut written = Vec::with_capacity(PipelineTrace::KEYS.len());
    for key in PipelineTrace::KEYS {
        let path = dir.join(file_name(key));
        match key {
            "sig_wx" => write_wav(&trace.sig_wx, &path)?,
            "sig_y_W" => write_wav(&trace.sig_y_w, &path)?,
            "sig_y_GV" => write_wav(&trace.sig_y_gv, &path)?,
            "sig_y_SUB" => write_wav(&trace.sig_y_sub, &path)?,
            "res_wx" => write_raw(&trace.res_wx, &path)?,
            "res_y" => write_raw(&trace.res_y, &path)?,
            "mcp_wx" => write_features(&trace.mcp_wx, &path)?,
            "mcp_y" => write_features(&trace.mcp_y, &path)?,
            "mcp_y_GV" => write_features(&trace.mcp_y_gv, &path)?,
            "mcp_y_SUB" => write_features(&trace.mcp_y_sub, &path)?,
            "env_W" => write_envelope(&trace.env_w, &path)?,
            "env_GV" => write_envelope(&trace.env_gv, &path)?,
            "flagged" => write_flagged(&trace.flagged, &path)?,
            other => unreachable!("unhandled trace key {other}"),
        }
        written.push(path);
    }
    Ok(written)
}
