//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when processing fails.
//! Diagnostics go to standard error; `detect` prints flagged frame indices
//! to standard output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use resvc_core::analysis::{estimate_f0, extract_mcep_centered, DEFAULT_FRAME_LENGTH};
use resvc_core::collapse::{detect_collapsed_frames, extract_envelope};
use resvc_core::convert::{collect_stats, mean_variance_converter, IdentityConverter, SpectralConverter};
use resvc_core::f0xform::compute_f0_ratio;
use resvc_core::mlsa::DEFAULT_NOISE_SEED;
use resvc_core::pipeline::convert_utterance_with_f0;
use resvc_core::{ConversionConfig, ConverterKind, F0Ratio};

use crate::converter::FileConverter;
use crate::error::{io_at, Error, Result};
use crate::features::write_features;
use crate::text::{format_flagged, read_f0, read_stats, write_f0, write_stats};
use crate::trace::write_trace;
use crate::wav::{read_wav, write_wav};

#[derive(Debug, Parser)]
#[command(name = "resvc", version, about = "Residual-domain voice conversion without a vocoder")]
pub struct Cli {
    /// More log output on standard error (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collect speaker statistics from every .wav file in a directory.
    Stats(StatsArgs),
    /// Convert one utterance.
    Convert(ConvertArgs),
    /// Compare two envelopes and print the frames where the test signal
    /// exceeds the reference by more than the threshold.
    Detect(DetectArgs),
    /// Dump the mel-cepstrum (and optionally F0) of one file.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct AnalysisOpts {
    /// Mel-cepstrum order.
    #[arg(long, default_value_t = 35)]
    order: usize,
    /// Frequency warping coefficient.
    #[arg(long, default_value_t = 0.455)]
    alpha: f64,
    /// Frame shift in seconds.
    #[arg(long, default_value_t = 0.005)]
    frame_shift: f64,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    wav_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    analysis: AnalysisOpts,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConverterArg {
    Identity,
    Meanvar,
    External,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Source utterance (16-bit mono WAV).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Source speaker statistics written by `stats`.
    #[arg(long)]
    src_stats: PathBuf,
    #[arg(long)]
    tgt_stats: PathBuf,
    #[arg(long, value_enum, default_value_t = ConverterArg::Identity)]
    converter: ConverterArg,
    /// Converted feature file (MCEP1) for `--converter external`.
    #[arg(long, required_if_eq("converter", "external"))]
    features: Option<PathBuf>,
    /// Directory receiving every intermediate artifact.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    /// Source F0 contour (one value per line) replacing the built-in
    /// estimate for the reference vocoder.
    #[arg(long)]
    f0_file: Option<PathBuf>,
    /// Seed of the reference vocoder's noise.
    #[arg(long, default_value_t = DEFAULT_NOISE_SEED)]
    seed: u64,
    /// Skip the GV postfilter (and with it collapse detection).
    #[arg(long)]
    no_gv: bool,
    /// Collapse threshold on the envelope difference.
    #[arg(long, default_value_t = 10000.0)]
    threshold: f64,
    /// Envelope slot length in samples.
    #[arg(long, default_value_t = 256)]
    slot: usize,
    /// F0 ratio overriding the one derived from the statistics.
    #[arg(long)]
    ratio: Option<f64>,
    #[command(flatten)]
    analysis: AnalysisOpts,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 10000.0)]
    threshold: f64,
    /// Frame shift in samples.
    #[arg(long, default_value_t = 110)]
    frame_shift: usize,
    #[arg(long, default_value_t = 256)]
    slot: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output feature file (MCEP1).
    #[arg(long)]
    out: PathBuf,
    /// Optional F0 output, one value per line.
    #[arg(long)]
    f0_out: Option<PathBuf>,
    #[command(flatten)]
    analysis: AnalysisOpts,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            2
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Stats(a) => stats(a),
        Command::Convert(a) => convert(a),
        Command::Detect(a) => detect(a),
        Command::Analyze(a) => analyze(a),
    }
}

fn check_analysis(a: &AnalysisOpts) -> Result<()> {
    if a.order < 1 {
        return Err(Error::Usage("--order must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&a.alpha) {
        return Err(Error::Usage(format!("--alpha {} outside [0, 1)", a.alpha)));
    }
    if !(a.frame_shift > 0.0 && a.frame_shift.is_finite()) {
        return Err(Error::Usage("--frame-shift must be a positive number of seconds".into()));
    }
    Ok(())
}

fn wav_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_at(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_at(dir)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    Ok(files)
}

fn stats(a: StatsArgs) -> Result<()> {
    check_analysis(&a.analysis)?;
    let files = wav_files(&a.wav_dir)?;
    if files.is_empty() {
        return Err(Error::Usage(format!("no .wav files in {}", a.wav_dir.display())));
    }
    let defaults = ConversionConfig::default();
    let mut utterances = Vec::with_capacity(files.len());
    for path in &files {
        let w = read_wav(path)?;
        let m = extract_mcep_centered(&w, a.analysis.order, a.analysis.alpha, a.analysis.frame_shift, DEFAULT_FRAME_LENGTH)?;
        let f0 = estimate_f0(&w, a.analysis.frame_shift, defaults.f0_floor, defaults.f0_ceil)?;
        log::info!("{}: {} frames, {} voiced", path.display(), m.frame_count(), f0.voiced().count());
        utterances.push((m, f0));
    }
    write_stats(&collect_stats(&utterances)?, &a.out)
}

fn convert(a: ConvertArgs) -> Result<()> {
    check_analysis(&a.analysis)?;
    let x = read_wav(&a.input)?;
    let src = read_stats(&a.src_stats)?;
    let tgt = read_stats(&a.tgt_stats)?;
    if src.dim() != a.analysis.order + 1 || tgt.dim() != a.analysis.order + 1 {
        return Err(Error::Usage(format!(
            "statistics have {} and {} coefficients but --order {} needs {}",
            src.dim(),
            tgt.dim(),
            a.analysis.order,
            a.analysis.order + 1
        )));
    }
    let f0_ratio = match a.ratio {
        Some(r) => F0Ratio::new(r).map_err(|e| Error::Usage(e.to_string()))?,
        None => compute_f0_ratio(src.logf0_mean, tgt.logf0_mean)?,
    };
    log::info!("F0 ratio {}", f0_ratio.value());
    let (converter, kind): (Box<dyn SpectralConverter>, ConverterKind) = match a.converter {
        ConverterArg::Identity => (Box::new(IdentityConverter), ConverterKind::Identity),
        ConverterArg::Meanvar => (Box::new(mean_variance_converter(&src, &tgt)?), ConverterKind::MeanVar),
        ConverterArg::External => {
            let path = a.features.as_deref().expect("clap enforces --features");
            (Box::new(FileConverter::open(path, x.sample_rate())?), ConverterKind::External)
        }
    };
    let cfg = ConversionConfig {
        f0_ratio,
        mcep_order: a.analysis.order,
        alpha: a.analysis.alpha,
        frame_shift_s: a.analysis.frame_shift,
        collapse_threshold: a.threshold,
        slot_length: a.slot,
        use_gv: !a.no_gv,
        converter_kind: kind,
        seed: a.seed,
        ..ConversionConfig::default()
    };
    let f0 = a.f0_file.as_deref().map(|p| read_f0(p, a.analysis.frame_shift)).transpose()?;
    let (y, trace) = convert_utterance_with_f0(&x, f0.as_ref(), &cfg, &converter, &src, &tgt)?;
    write_wav(&y, &a.out)?;
    if !trace.flagged.is_empty() {
        log::info!("substituted {} frames", trace.flagged.len());
    }
    if let Some(dir) = &a.trace_dir {
        write_trace(&trace, dir)?;
    }
    Ok(())
}

fn detect(a: DetectArgs) -> Result<()> {
    if a.frame_shift == 0 {
        return Err(Error::Usage("--frame-shift must be at least one sample".into()));
    }
    if !(a.threshold > 0.0) {
        return Err(Error::Usage("--threshold must be positive".into()));
    }
    if a.slot < 8 {
        return Err(Error::Usage("--slot must be at least 8".into()));
    }
    let reference = read_wav(&a.reference)?;
    let test = read_wav(&a.test)?;
    let env_ref = extract_envelope(&reference, a.slot)?;
    let env_test = extract_envelope(&test, a.slot)?;
    let frames = reference.len().min(test.len()).div_ceil(a.frame_shift);
    let flagged = detect_collapsed_frames(&env_ref, &env_test, a.threshold, a.frame_shift, frames)?;
    let mut out = std::io::stdout().lock();
    out.write_all(format_flagged(&flagged).as_bytes())
        .map_err(io_at(Path::new("<stdout>")))
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    check_analysis(&a.analysis)?;
    let w = read_wav(&a.input)?;
    let m = extract_mcep_centered(&w, a.analysis.order, a.analysis.alpha, a.analysis.frame_shift, DEFAULT_FRAME_LENGTH)?;
    write_features(&m, &a.out)?;
    if let Some(path) = &a.f0_out {
        let defaults = ConversionConfig::default();
        write_f0(&estimate_f0(&w, a.analysis.frame_shift, defaults.f0_floor, defaults.f0_ceil)?, path)?;
    }
    Ok(())
}
