//! `klasr`: train, recognize, synthesize and evaluate from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use klasr::dictionary::Feature;
use klasr::divergence::StatisticForm;
use klasr::eval::{
    figure_grid, method_params, parse_experiment, run_experiment, run_trials, training_corpus,
    trial_corpus, ExperimentConfig, ExperimentOutput, SweepSpec,
};
use klasr::signal::{load_signal, save_signal, SampleFormat};
use klasr::{
    build_dictionary, load_dictionary, recognize_with_form, save_dictionary, Dictionary, Error,
    Method, MethodParams, PreprocessConfig, Signal,
};

const PRESETS: [(&str, &str); 5] = [
    ("reference", include_str!("../configs/reference.conf")),
    (
        "correlation_order",
        include_str!("../configs/correlation_order.conf"),
    ),
    (
        "spectral_window",
        include_str!("../configs/spectral_window.conf"),
    ),
    ("filter_order", include_str!("../configs/filter_order.conf")),
    ("comparison", include_str!("../configs/comparison.conf")),
];

#[derive(Parser)]
#[command(
    name = "klasr",
    version,
    about = "Isolated-word recognition by least information divergence"
)]
struct Cli {
    /// Base seed for every random draw; overrides the `seed` key of a config.
    #[arg(long, global = true, env = "KLASR_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dictionary from a directory of labeled recordings.
    Train(TrainArgs),
    /// Score one recording against a dictionary.
    Recognize(RecognizeArgs),
    /// Write the synthetic corpus described by a config as WAV files.
    Synth(SynthArgs),
    /// Run recognition trials on the synthetic corpus.
    Eval(EvalArgs),
    /// Run a parameter sweep or the five-method comparison.
    Sweep(SweepArgs),
    /// Describe a dictionary file.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct AudioArgs {
    /// Sample format; by default taken from the file extension
    /// (wav, pcm8/u8, pcm16/s16/raw).
    #[arg(long, value_parser = parse_format)]
    format: Option<SampleFormat>,
    /// Sample rate of raw PCM input in Hz.
    #[arg(long, default_value_t = 8000)]
    rate: u32,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of `<label>.<ext>` files, or files listed in manifest.csv.
    corpus_dir: PathBuf,
    /// Output dictionary path.
    #[arg(long)]
    out: PathBuf,
    /// correlation, spectral, filter, cepstral or msfb.
    #[arg(long, default_value = "correlation")]
    method: Method,
    /// Matrix order (correlation) or AR order (filter, cepstral).
    #[arg(long)]
    order: Option<usize>,
    /// Input-side order; must equal --order for correlation.
    #[arg(long)]
    recognition_order: Option<usize>,
    /// FFT window length (spectral, msfb), a power of two.
    #[arg(long)]
    window: Option<usize>,
    /// Window overlap fraction in [0, 1) (spectral, msfb).
    #[arg(long)]
    overlap: Option<f64>,
    /// Diagonal loading of the correlation matrix, relative to its mean
    /// diagonal.
    #[arg(long)]
    regularization: Option<f64>,
    /// Default correlation statistic: full_kl or paper_eq3.
    #[arg(long)]
    form: Option<StatisticForm>,
    /// Number of cepstral coefficients (cepstral, msfb).
    #[arg(long)]
    n_ceps: Option<usize>,
    /// Number of mel filters (msfb).
    #[arg(long)]
    n_filters: Option<usize>,
    /// Cepstral distance weighting: index or uniform.
    #[arg(long)]
    weighting: Option<String>,
    /// Filter scaling: innovation or signal.
    #[arg(long)]
    normalization: Option<String>,
    /// Keep the DC offset.
    #[arg(long)]
    keep_dc: bool,
    /// Skip unit-variance normalization.
    #[arg(long)]
    no_normalize: bool,
    /// Shortest accepted recording, in samples.
    #[arg(long, default_value_t = 2)]
    min_length: usize,
    #[command(flatten)]
    audio: AudioArgs,
}

#[derive(Args)]
struct RecognizeArgs {
    /// Recording to recognize.
    input: PathBuf,
    /// Dictionary built by `train`.
    #[arg(long)]
    dict: PathBuf,
    /// Correlation statistic (full_kl or paper_eq3); defaults to the
    /// dictionary's.
    #[arg(long)]
    form: Option<StatisticForm>,
    #[command(flatten)]
    audio: AudioArgs,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled configuration: reference, correlation_order, spectral_window,
    /// filter_order or comparison.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Output directory for the WAV files and manifest.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Directory for confusion.csv; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// CSV output path; the CSV goes to standard output without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    /// Dictionary file.
    dict: PathBuf,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Numerical(_) => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Writes a line to stdout; a closed pipe ends the command quietly.
macro_rules! out {
    ($($t:tt)*) => {
        if std::io::Write::write_fmt(&mut std::io::stdout(), format_args!("{}\n", format_args!($($t)*))).is_err() {
            return Ok(());
        }
    };
}

macro_rules! out_raw {
    ($($t:tt)*) => {
        if std::io::Write::write_fmt(&mut std::io::stdout(), format_args!($($t)*)).is_err() {
            return Ok(());
        }
    };
}

type CliResult<T = ()> = Result<T, Failure>;

fn parse_format(s: &str) -> Result<SampleFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Recognize(args) => recognize_cmd(args),
        Command::Synth(args) => synth(args, cli.seed),
        Command::Eval(args) => eval(args, cli.seed),
        Command::Sweep(args) => sweep(args, cli.seed),
        Command::Inspect(args) => inspect(args),
    }
}

fn format_for(path: &Path, audio: &AudioArgs) -> CliResult<SampleFormat> {
    if let Some(f) = audio.format {
        return Ok(f);
    }
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(SampleFormat::from_extension)
        .ok_or_else(|| {
            Failure::usage(format!(
                "cannot tell the sample format of {}; pass --format",
                path.display()
            ))
        })
}

fn train_params(args: &TrainArgs) -> CliResult<(MethodParams, PreprocessConfig)> {
    let mut settings: Vec<(&str, String)> = Vec::new();
    let mut set = |k, v: Option<String>| {
        if let Some(v) = v {
            settings.push((k, v));
        }
    };
    set("order", args.order.map(|v| v.to_string()));
    set(
        "recognition_order",
        args.recognition_order.map(|v| v.to_string()),
    );
    set("window", args.window.map(|v| v.to_string()));
    set("overlap", args.overlap.map(|v| v.to_string()));
    set("regularization", args.regularization.map(|v| v.to_string()));
    set("form", args.form.map(|v| v.to_string()));
    set("n_ceps", args.n_ceps.map(|v| v.to_string()));
    set("n_filters", args.n_filters.map(|v| v.to_string()));
    set("weighting", args.weighting.clone());
    set("normalization", args.normalization.clone());
    let params =
        method_params(args.method, &settings).map_err(|e| Failure::usage(e.to_string()))?;
    if args.min_length < 2 {
        return Err(Failure::usage("--min-length must be at least 2"));
    }
    let preprocess = PreprocessConfig {
        remove_dc: !args.keep_dc,
        normalize_variance: !args.no_normalize,
        min_length_samples: args.min_length,
    };
    Ok((params, preprocess))
}

/// (file, label) pairs of a corpus directory: manifest.csv when present,
/// otherwise every audio file in name order labeled by its stem.
fn corpus_listing(dir: &Path) -> CliResult<Vec<(PathBuf, String)>> {
    let manifest = dir.join("manifest.csv");
    if manifest.is_file() {
        let text = fs::read_to_string(&manifest)
            .map_err(|e| Failure::data(format!("{}: {e}", manifest.display())))?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line == "file,label") {
                continue;
            }
            let (file, label) = line.split_once(',').ok_or_else(|| {
                Failure::data(format!(
                    "{} line {}: expected file,label",
                    manifest.display(),
                    i + 1
                ))
            })?;
            out.push((dir.join(file.trim()), label.trim().to_string()));
        }
        return Ok(out);
    }
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::data(e.to_string()))?.path();
        let audio = path
            .extension()
            .and_then(|e| e.to_str())
            .and_then(SampleFormat::from_extension)
            .is_some();
        if path.is_file() && audio {
            let label = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            files.push((path, label));
        }
    }
    files.sort();
    Ok(files)
}

fn describe(feature: &Feature) -> String {
    match feature {
        Feature::Correlation(t) => {
            format!(
                "inverse correlation matrix of order {}, ln det {:.4}",
                t.order(),
                t.log_det_r
            )
        }
        Feature::Spectral(p) => format!("{} PSD bins, window {}", p.bins.len(), p.window_len),
        Feature::Filter(m) => format!(
            "AR order {}, excitation variance {:.6}",
            m.order(),
            m.residual_variance()
        ),
        Feature::Cepstral(c) => format!("{} cepstral coefficients", c.coeffs.len()),
    }
}

fn train(args: TrainArgs) -> CliResult {
    let (params, preprocess) = train_params(&args)?;
    let listing = corpus_listing(&args.corpus_dir)?;
    if listing.is_empty() {
        return Err(Failure::data(format!(
            "no corpus files in {}",
            args.corpus_dir.display()
        )));
    }
    let mut corpus = Vec::with_capacity(listing.len());
    for (path, label) in listing {
        let format = format_for(&path, &args.audio)?;
        let signal = load_signal(&path, format, Some(args.audio.rate))
            .map_err(|e| e.context(format!("label '{label}'")))?;
        corpus.push((label, signal));
    }
    let dict = build_dictionary(&corpus, &params, &preprocess)?;
    save_dictionary(&dict, &args.out)?;
    for e in &dict.entries {
        out!("{}: {}", e.label, describe(&e.feature));
    }
    out!(
        "wrote {} entries ({} method) to {}",
        dict.len(),
        dict.method(),
        args.out.display()
    );
    Ok(())
}

fn recognize_cmd(args: RecognizeArgs) -> CliResult {
    let format = format_for(&args.input, &args.audio)?;
    let dict = load_dictionary(&args.dict)?;
    let input = load_signal(&args.input, format, Some(args.audio.rate))?;
    let form = args.form.unwrap_or(match dict.params {
        MethodParams::Correlation { form, .. } => form,
        _ => StatisticForm::default(),
    });
    let result = recognize_with_form(&input, &dict, form)?;
    let mut out = format!("winner {}\n", result.winner_label);
    for i in result.ranking() {
        writeln!(out, "{} {:.9}", dict.entries[i].label, result.scores[i]).unwrap();
    }
    out_raw!("{out}");
    Ok(())
}

fn load_config(source: &ConfigSource, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let text = match (&source.config, &source.preset) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| Failure::data(format!("cannot read config {}: {e}", path.display())))?,
        (None, Some(name)) => PRESETS
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                Failure::usage(format!(
                    "unknown preset '{name}' (one of {})",
                    names.join(", ")
                ))
            })?,
        (None, None) => return Err(Failure::usage("pass --config or --preset")),
    };
    let mut cfg = parse_experiment(&text).map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(seed) = seed {
        cfg.trials.rng_seed = seed;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

/// Scales to a 0.9 full-scale peak so the fixed-point file cannot clip.
fn to_full_scale(s: &Signal) -> CliResult<Signal> {
    let peak = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { 0.9 / peak } else { 1.0 };
    Ok(Signal::new(
        s.samples().iter().map(|v| v * gain).collect(),
        s.sample_rate_hz(),
    )?)
}

fn synth(args: SynthArgs, seed: Option<u64>) -> CliResult {
    let cfg = load_config(&args.source, seed)?;
    create_dir(&args.out)?;
    let mut manifest = String::from("file,label\n");
    for (label, signal) in training_corpus(&cfg.trials)? {
        let file = format!("{label}.wav");
        save_signal(
            &args.out.join(&file),
            &to_full_scale(&signal)?,
            SampleFormat::Wav,
            cfg.wav_bits,
        )?;
        writeln!(manifest, "{file},{label}").unwrap();
    }
    write_file(&args.out.join("manifest.csv"), &manifest)?;
    let mut written = cfg.trials.corpus.n_words;
    if cfg.synth_count > 0 {
        let dir = args.out.join("trials");
        create_dir(&dir)?;
        let mut manifest = String::from("file,label\n");
        for (i, (label, signal)) in trial_corpus(&cfg.trials, cfg.synth_count)?
            .into_iter()
            .enumerate()
        {
            let file = format!("{label}_{:03}.wav", i % cfg.synth_count);
            save_signal(
                &dir.join(&file),
                &to_full_scale(&signal)?,
                SampleFormat::Wav,
                cfg.wav_bits,
            )?;
            writeln!(manifest, "{file},{label}").unwrap();
            written += 1;
        }
        write_file(&dir.join("manifest.csv"), &manifest)?;
    }
    out!("wrote {written} files to {}", args.out.display());
    Ok(())
}

fn eval(args: EvalArgs, seed: Option<u64>) -> CliResult {
    let cfg = load_config(&args.source, seed)?;
    let report = run_trials(&cfg.trials)?;
    out!(
        "method {} w = {:.6} ({} of {})",
        cfg.trials.params.method(),
        report.w,
        report.k_corr,
        report.k_tot
    );
    for (label, acc) in &report.per_word_accuracy {
        out!("  {label} {acc:.4}");
    }
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(
            &dir.join("confusion.csv"),
            &ExperimentOutput::Trials(report).csv(),
        )?;
    }
    Ok(())
}

fn sweep(args: SweepArgs, seed: Option<u64>) -> CliResult {
    let mut cfg = load_config(&args.source, seed)?;
    if cfg.sweep.is_none() {
        let (name, values) = figure_grid(cfg.trials.params.method());
        cfg.sweep = Some(SweepSpec::Parameter {
            name: name.to_string(),
            values,
        });
    }
    let output = run_experiment(&cfg)?;
    let csv = output.csv();
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            match &output {
                ExperimentOutput::Sweep(rows) => {
                    for r in rows {
                        out!("{} w = {:.6}", r.value, r.w);
                    }
                }
                ExperimentOutput::Comparison(rows) => {
                    for r in rows {
                        let ws: Vec<String> = r.w.iter().map(|w| format!("{w:.4}")).collect();
                        out!("level {}: {}", r.relative_param, ws.join(" "));
                    }
                }
                ExperimentOutput::Trials(r) => out!("w = {:.6}", r.w),
            }
        }
        None => out_raw!("{csv}"),
    }
    Ok(())
}

fn inspect(args: InspectArgs) -> CliResult {
    let dict: Dictionary = load_dictionary(&args.dict)?;
    out!("format version {}", dict.format_version());
    out!("method {}", dict.method());
    out!("parameters {:?}", dict.params);
    out!(
        "preprocess remove_dc={} normalize_variance={} min_length={}",
        dict.preprocess.remove_dc,
        dict.preprocess.normalize_variance,
        dict.preprocess.min_length_samples
    );
    out!("sample rate {} Hz", dict.sample_rate_hz);
    out!("{} entries", dict.len());
    for e in &dict.entries {
        out!("  {}: {}", e.label, describe(&e.feature));
    }
    Ok(())
}
