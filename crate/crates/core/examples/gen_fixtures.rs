//! Regenerates the demo fixtures:
//!
//! ```text
//! cargo run -p synesthete-core --example gen_fixtures -- <out-dir>
//! ```
//!
//! Writes `smile_onset.jsonl`, `affect_train.csv` and `golden_diag.jsonl`.

use std::fs;
use std::path::PathBuf;

use synesthete_core::affect::write_labeled_expressions;
use synesthete_core::device::simulator_sink;
use synesthete_core::expression::to_jsonl_record;
use synesthete_core::pipeline::{StreamOptions, TranscodeSettings};
use synesthete_core::synthetic::{demo_models, demo_stream, demo_training_rows};
use synesthete_core::Transcoder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| ".".into()).into();
    fs::create_dir_all(&out)?;

    let stream = demo_stream();
    let mut jsonl = String::new();
    for lm in &stream {
        jsonl.push_str(&to_jsonl_record(lm));
        jsonl.push('\n');
    }
    fs::write(out.join("smile_onset.jsonl"), jsonl)?;
    fs::write(
        out.join("affect_train.csv"),
        write_labeled_expressions(&demo_training_rows()),
    )?;

    let (affect, color) = demo_models()?;
    let t = Transcoder::new(affect, color, TranscodeSettings::default())?;
    let mut diag = Vec::new();
    let mut sim = simulator_sink(1);
    let summary = t.run_stream(
        stream.into_iter().map(Ok),
        &mut sim,
        &StreamOptions::default(),
        Some(&mut diag),
    )?;
    fs::write(out.join("golden_diag.jsonl"), diag)?;
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}
