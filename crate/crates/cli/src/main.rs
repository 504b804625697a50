//! `synesthete`: train the affect and colour models, transcode landmark
//! streams into lamp colours, and run bottleneck experiments.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a runtime error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use synesthete_core::chroma::ColorInterpretation;
use synesthete_core::expression::StreamFormat;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "synesthete",
    version,
    about = "Facial expression to lamp colour transcoder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the expression to PAD model from labeled expression vectors.
    TrainAffect(TrainAffectArgs),
    /// Fit the PAD to colour model from the emotion colour table.
    TrainColor(TrainColorArgs),
    /// Turn a landmark stream into lamp colours.
    Transcode(TranscodeArgs),
    /// Solve a discrete information bottleneck problem.
    IbSolve(IbSolveArgs),
    /// Decode a raw lamp byte stream into `R G B` lines.
    LampSim(LampSimArgs),
    /// Print the bundled emotion tables as JSON.
    TablesDump(TablesDumpArgs),
}

#[derive(Debug, Args)]
struct TrainAffectArgs {
    /// CSV of `v0..v6,label` rows.
    #[arg(long)]
    data: PathBuf,
    /// Anchor table JSON; the bundled table when omitted.
    #[arg(long)]
    anchors: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3, value_parser = parse_lambda, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TrainingMode {
    Table,
    Hybrid,
}

#[derive(Debug, Args)]
struct TrainColorArgs {
    /// Emotion colour table JSON; the bundled table when omitted.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TrainingMode::Table)]
    mode: TrainingMode,
    #[arg(long, default_value_t = 1e-3, value_parser = parse_lambda, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Jsonl,
    Csv,
}

impl From<InputFormat> for StreamFormat {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Jsonl => StreamFormat::Jsonl,
            InputFormat::Csv => StreamFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Interpretation {
    Hsl,
    Hsv,
}

impl From<Interpretation> for ColorInterpretation {
    fn from(i: Interpretation) -> Self {
        match i {
            Interpretation::Hsl => ColorInterpretation::Hsl,
            Interpretation::Hsv => ColorInterpretation::Hsv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SinkSpec {
    Sim,
    Serial(String),
}

fn parse_sink(s: &str) -> Result<SinkSpec, String> {
    match s {
        "sim" => Ok(SinkSpec::Sim),
        _ => match s.strip_prefix("serial:") {
            Some(port) if !port.is_empty() => Ok(SinkSpec::Serial(port.to_string())),
            _ => Err("expected `sim` or `serial:PORT`".into()),
        },
    }
}

#[derive(Debug, Args)]
struct TranscodeArgs {
    /// Transcoder configuration JSON.
    #[arg(long, conflicts_with_all = ["affect_model", "color_model"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    affect_model: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    color_model: Option<PathBuf>,
    /// Anchor table used for the nearest-anchor summary.
    #[arg(long)]
    anchors: Option<PathBuf>,
    /// Emotion colour table used for the nearest-hue summary.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Landmark stream, or `-` for standard input.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value_t = InputFormat::Jsonl)]
    format: InputFormat,
    /// Skip malformed frames instead of stopping.
    #[arg(long)]
    lenient: bool,
    /// `sim` or `serial:PORT`.
    #[arg(long, default_value = "sim", value_parser = parse_sink)]
    sink: SinkSpec,
    #[arg(long, default_value_t = synesthete_core::device::DEFAULT_BAUD)]
    baud: u32,
    /// Per-frame diagnostic JSONL, or `-` for standard output.
    #[arg(long)]
    diag: Option<String>,
    /// Write the simulator's decoded `R G B` lines here.
    #[arg(long)]
    sim_dump: Option<PathBuf>,
    /// Smoothing weight of the newest frame, in [0, 1].
    #[arg(long, value_parser = parse_unit)]
    alpha: Option<f64>,
    /// Sample from the residual noise model instead of using the mean.
    #[arg(long)]
    stochastic: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Leave PAD unclamped.
    #[arg(long)]
    no_clamp: bool,
    #[arg(long, value_enum)]
    interpretation: Option<Interpretation>,
}

#[derive(Debug, Args)]
struct IbSolveArgs {
    /// CSV matrix of p(v, c), one row per v.
    #[arg(long)]
    joint: PathBuf,
    /// Number of bottleneck clusters.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_parser = parse_beta)]
    beta: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
}

#[derive(Debug, Args)]
struct LampSimArgs {
    /// Raw wire bytes, or `-` for standard input.
    #[arg(long, default_value = "-")]
    input: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    All,
    Plutchik,
    Anchors,
}

#[derive(Debug, Args)]
struct TablesDumpArgs {
    #[arg(long, value_enum, default_value_t = Which::All)]
    which: Which,
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("lambda must be finite and >= 0".into())
    }
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("beta must be finite and > 0".into())
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err("must be in [0, 1]".into())
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SYNESTHETE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging();

    let result = match cli.command {
        Command::TrainAffect(a) => commands::train_affect(a),
        Command::TrainColor(a) => commands::train_color(a),
        Command::Transcode(a) => commands::transcode(a),
        Command::IbSolve(a) => commands::ib_solve(a),
        Command::LampSim(a) => commands::lamp_sim(a),
        Command::TablesDump(a) => commands::tables_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
