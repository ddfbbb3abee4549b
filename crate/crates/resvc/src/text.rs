//! Line-oriented text formats: speaker statistics, F0 contours, envelope
//! dumps and flagged-frame lists.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! reading a file back gives the same `f64` values.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use resvc_core::convert::SpeakerStats;
use resvc_core::{EnvelopeSignal, F0Contour};

use crate::error::{io_at, Error, Result};

const STATS_KEYS: [&str; 5] = ["logf0_mean", "logf0_var", "mcep_mean", "mcep_var", "gv"];

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn format_stats(s: &SpeakerStats) -> String {
    format!(
        "logf0_mean = {}\nlogf0_var = {}\nmcep_mean = {}\nmcep_var = {}\ngv = {}\n",
        s.logf0_mean,
        s.logf0_var,
        join(&s.mcep_mean),
        join(&s.mcep_var),
        join(&s.gv)
    )
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// ignored; every key must appear exactly once.
pub fn parse_stats(text: &str, path: &Path) -> Result<SpeakerStats> {
    let parse_error = |line: usize, detail: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        detail,
    };
    let mut values: [Option<Vec<f64>>; 5] = Default::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(i + 1, "expected `key = value`".into()))?;
        let key = key.trim();
        let slot = STATS_KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| parse_error(i + 1, format!("unknown key `{key}`")))?;
        if values[slot].is_some() {
            return Err(parse_error(i + 1, format!("duplicate key `{key}`")));
        }
        let parsed = value
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|e| parse_error(i + 1, format!("`{key}`: {v}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        values[slot] = Some(parsed);
    }
    let mut take = |slot: usize| {
        values[slot]
            .take()
            .ok_or_else(|| parse_error(0, format!("missing key `{}`", STATS_KEYS[slot])))
    };
    let scalar = |v: Vec<f64>, key: &str| match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(parse_error(0, format!("`{key}` must be a single number"))),
    };
    let stats = SpeakerStats {
        logf0_mean: scalar(take(0)?, STATS_KEYS[0])?,
        logf0_var: scalar(take(1)?, STATS_KEYS[1])?,
        mcep_mean: take(2)?,
        mcep_var: take(3)?,
        gv: take(4)?,
    };
    stats.validate()?;
    Ok(stats)
}

pub fn write_stats(s: &SpeakerStats, path: &Path) -> Result<()> {
    fs::write(path, format_stats(s)).map_err(io_at(path))
}

pub fn read_stats(path: &Path) -> Result<SpeakerStats> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    parse_stats(&text, path)
}

fn numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                detail: format!("{}: {e}", l.trim()),
            })
        })
        .collect()
}

/// One F0 value (Hz, 0 for unvoiced) per line.
pub fn write_f0(f0: &F0Contour, path: &Path) -> Result<()> {
    let mut s = String::new();
    for v in f0.values() {
        writeln!(s, "{v}").unwrap();
    }
    fs::write(path, s).map_err(io_at(path))
}

pub fn read_f0(path: &Path, frame_shift_s: f64) -> Result<F0Contour> {
    Ok(F0Contour::new(numbers(path)?, frame_shift_s)?)
}

/// Two columns: sample index and envelope value.
pub fn format_envelope(e: &EnvelopeSignal) -> String {
    let mut s = String::with_capacity(e.len() * 16);
    for (i, v) in e.values().iter().enumerate() {
        writeln!(s, "{i} {v}").unwrap();
    }
    s
}

pub fn write_envelope(e: &EnvelopeSignal, path: &Path) -> Result<()> {
    fs::write(path, format_envelope(e)).map_err(io_at(path))
}

/// One frame index per line, ascending.
pub fn format_flagged(flagged: &BTreeSet<usize>) -> String {
    flagged.iter().map(|t| format!("{t}\n")).collect()
}

pub fn write_flagged(flagged: &BTreeSet<usize>, path: &Path) -> Result<()> {
    fs::write(path, format_flagged(flagged)).map_err(io_at(path))
}
