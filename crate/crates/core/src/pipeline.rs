//! End-to-end transcoding: landmarks → expression → PAD → colour → RGB.
//!
//! PAD is smoothed with an exponential moving average,
//! `ē_t = α·e_t + (1 − α)·ē_{t−1}` with `ē_0 = e_0`, so `α = 1` is a
//! memoryless mapping and `α = 0` freezes the first frame.
//!
//! Colours reach the sink through a bounded queue drained by a worker
//! thread. When the queue is full the producer either blocks (lossless) or
//! discards the oldest queued colour (realtime).

use std::io::Write;
use std::path::{Path, PathBuf};

use crossbeam_channel::{bounded, Receiver, Sender, TrySendError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affect::{sample_pad, to_pad, AffectModel, PadAnchorTable, PadPoint};
use crate::chroma::{
    hsl_to_rgb, nearest_hue, sample_color, to_color, ColorInterpretation, ColorModel, HslColor,
    PlutchikTable, RgbColor,
};
use crate::device::ColorSink;
use crate::expression::{extract_expression, LandmarkSet, ParseError};

pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_QUEUE_CAPACITY: usize = 64;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot load {path}: {reason}")]
    Load { path: PathBuf, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("frame {frame_id}: {reason}")]
    Frame { frame_id: u64, reason: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_true() -> bool {
    true
}

/// File form of the transcoder configuration. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscoderConfig {
    pub affect_model_path: PathBuf,
    pub color_model_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_table_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plutchik_table_path: Option<PathBuf>,
    #[serde(default = "default_alpha")]
    pub smoothing_alpha: f64,
    #[serde(default = "default_true")]
    pub clamp: bool,
    #[serde(default)]
    pub stochastic: bool,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub color_interpretation: ColorInterpretation,
}

impl TranscoderConfig {
    pub fn new(
        affect_model_path: impl Into<PathBuf>,
        color_model_path: impl Into<PathBuf>,
    ) -> Self {
        let d = TranscodeSettings::default();
        TranscoderConfig {
            affect_model_path: affect_model_path.into(),
            color_model_path: color_model_path.into(),
            anchor_table_path: None,
            plutchik_table_path: None,
            smoothing_alpha: d.smoothing_alpha,
            clamp: d.clamp,
            stochastic: d.stochastic,
            rng_seed: d.rng_seed,
            color_interpretation: d.color_interpretation,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| load_err(path, e))?;
        let mut cfg: TranscoderConfig =
            serde_json::from_str(&text).map_err(|e| load_err(path, e))?;
        if let Some(dir) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            resolve(&mut cfg.affect_model_path);
            resolve(&mut cfg.color_model_path);
            cfg.anchor_table_path.as_mut().map(resolve);
            cfg.plutchik_table_path.as_mut().map(resolve);
        }
        Ok(cfg)
    }

    pub fn settings(&self) -> TranscodeSettings {
        TranscodeSettings {
            smoothing_alpha: self.smoothing_alpha,
            clamp: self.clamp,
            stochastic: self.stochastic,
            rng_seed: self.rng_seed,
            color_interpretation: self.color_interpretation,
        }
    }
}

fn load_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Load {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranscodeSettings {
    pub smoothing_alpha: f64,
    pub clamp: bool,
    pub stochastic: bool,
    pub rng_seed: u64,
    pub color_interpretation: ColorInterpretation,
}

impl Default for TranscodeSettings {
    fn default() -> Self {
        TranscodeSettings {
            smoothing_alpha: DEFAULT_ALPHA,
            clamp: true,
            stochastic: false,
            rng_seed: 0,
            color_interpretation: ColorInterpretation::Hsv,
        }
    }
}

/// Per-stream mutable state.
#[derive(Debug, Clone)]
pub struct SmoothingState {
    smoothed: Option<PadPoint>,
    rng: ChaCha8Rng,
}

impl SmoothingState {
    pub fn new(rng_seed: u64) -> Self {
        SmoothingState {
            smoothed: None,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
        }
    }

    pub fn smoothed(&self) -> Option<PadPoint> {
        self.smoothed
    }
}

/// One transcoded frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorFrame {
    pub frame_id: u64,
    pub rgb: RgbColor,
    /// Smoothed PAD that produced the colour.
    pub pad: PadPoint,
    pub hsl: HslColor,
}

/// Fixed six-decimal rendering; negative zero prints as zero.
fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

impl ColorFrame {
    /// `{"frame":N,"pad":[p,a,d],"hsl":[h,s,l],"rgb":[r,g,b]}`, reals
    /// rounded to six decimals.
    pub fn diag_line(&self) -> String {
        format!(
            r#"{{"frame":{},"pad":[{},{},{}],"hsl":[{},{},{}],"rgb":[{},{},{}]}}"#,
            self.frame_id,
            fmt6(self.pad.p),
            fmt6(self.pad.a),
            fmt6(self.pad.d),
            fmt6(self.hsl.h),
            fmt6(self.hsl.s),
            fmt6(self.hsl.l),
            self.rgb.r,
            self.rgb.g,
            self.rgb.b
        )
    }
}

pub struct Transcoder {
    affect: AffectModel,
    color: ColorModel,
    anchors: PadAnchorTable,
    plutchik: PlutchikTable,
    settings: TranscodeSettings,
}

impl Transcoder {
    pub fn new(
        affect: AffectModel,
        color: ColorModel,
        settings: TranscodeSettings,
    ) -> Result<Self, PipelineError> {
        let a = settings.smoothing_alpha;
        if !(0.0..=1.0).contains(&a) {
            return Err(PipelineError::Config(format!(
                "smoothing_alpha must be in [0, 1], got {a}"
            )));
        }
        Ok(Transcoder {
            affect,
            color,
            anchors: PadAnchorTable::bundled(),
            plutchik: PlutchikTable::bundled(),
            settings,
        })
    }

    pub fn with_tables(mut self, anchors: PadAnchorTable, plutchik: PlutchikTable) -> Self {
        self.anchors = anchors;
        self.plutchik = plutchik;
        self
    }

    pub fn load(cfg: &TranscoderConfig) -> Result<Self, PipelineError> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| load_err(p, e));
        let affect = AffectModel::from_json(&read(&cfg.affect_model_path)?)
            .map_err(|e| load_err(&cfg.affect_model_path, e))?;
        let color = ColorModel::from_json(&read(&cfg.color_model_path)?)
            .map_err(|e| load_err(&cfg.color_model_path, e))?;
        let anchors = match &cfg.anchor_table_path {
            Some(p) => PadAnchorTable::from_json(&read(p)?).map_err(|e| load_err(p, e))?,
            None => PadAnchorTable::bundled(),
        };
        let plutchik = match &cfg.plutchik_table_path {
            Some(p) => PlutchikTable::from_json(&read(p)?).map_err(|e| load_err(p, e))?,
            None => PlutchikTable::bundled(),
        };
        Ok(Self::new(affect, color, cfg.settings())?.with_tables(anchors, plutchik))
    }

    pub fn settings(&self) -> &TranscodeSettings {
        &self.settings
    }

    pub fn initial_state(&self) -> SmoothingState {
        SmoothingState::new(self.settings.rng_seed)
    }

    pub fn transcode_frame(
        &self,
        lm: &LandmarkSet,
        state: &mut SmoothingState,
    ) -> Result<ColorFrame, PipelineError> {
        let frame_err = |e: &dyn std::fmt::Display| PipelineError::Frame {
            frame_id: lm.frame_id,
            reason: e.to_string(),
        };
        let s = &self.settings;
        let v = extract_expression(lm).map_err(|e| frame_err(&e))?;
        let raw = if s.stochastic {
            sample_pad(&self.affect, &v, s.clamp, &mut state.rng)
        } else {
            to_pad(&self.affect, &v, s.clamp)
        }
        .map_err(|e| frame_err(&e))?;

        let alpha = s.smoothing_alpha;
        let pad = match state.smoothed {
            None => raw,
            Some(prev) => PadPoint::new(
                alpha * raw.p + (1.0 - alpha) * prev.p,
                alpha * raw.a + (1.0 - alpha) * prev.a,
                alpha * raw.d + (1.0 - alpha) * prev.d,
            ),
        };

        let hsl = if s.stochastic {
            sample_color(&self.color, pad, &mut state.rng)
        } else {
            to_color(&self.color, pad)
        }
        .map_err(|e| frame_err(&e))?;
        state.smoothed = Some(pad);

        Ok(ColorFrame {
            frame_id: lm.frame_id,
            rgb: hsl_to_rgb(hsl, s.color_interpretation),
            pad,
            hsl,
        })
    }

    /// Label of the closest anchor in PAD space.
    pub fn nearest_anchor(&self, pad: PadPoint) -> &str {
        let mut best = &self.anchors.entries()[0];
        for entry in self.anchors.entries() {
            if pad.distance(&entry.1) < pad.distance(&best.1) {
                best = entry;
            }
        }
        &best.0
    }

    /// Processes a whole stream in order.
    ///
    /// In lenient mode a malformed record or failing frame is counted, noted
    /// in the diagnostic output as `{"line"|"frame":…,"error":…}`, and nothing
    /// is sent, so the lamp holds its last colour. In strict mode the first
    /// such error is returned.
    pub fn run_stream<I>(
        &self,
        input: I,
        sink: &mut (dyn ColorSink + Send),
        opts: &StreamOptions,
        mut diag: Option<&mut dyn Write>,
    ) -> Result<StreamSummary, PipelineError>
    where
        I: IntoIterator<Item = Result<LandmarkSet, ParseError>>,
    {
        let mode = opts.delivery.unwrap_or(if sink.capability().lossy {
            DeliveryMode::Realtime
        } else {
            DeliveryMode::Lossless
        });
        let (tx, rx) = bounded::<RgbColor>(opts.queue_capacity.max(1));
        let drain = rx.clone();

        std::thread::scope(|scope| {
            let worker = scope.spawn(move || {
                let mut errors = 0usize;
                for color in rx.iter() {
                    if let Err(e) = sink.deliver(color) {
                        log::warn!("sink delivery failed: {e}");
                        errors += 1;
                    }
                }
                if let Err(e) = sink.flush() {
                    log::warn!("sink flush failed: {e}");
                    errors += 1;
                }
                errors
            });

            let mut queue = Queue {
                tx,
                drain,
                mode,
                dropped: 0,
            };
            let produced = self.produce(input, &mut queue, opts.lenient, &mut diag);
            let dropped = queue.dropped;
            drop(queue);
            let sink_errors = worker.join().expect("sink worker panicked");

            let mut summary = produced?;
            summary.sink_errors = sink_errors;
            summary.dropped = dropped;
            if let Some(out) = diag.as_mut() {
                out.flush()?;
            }
            Ok(summary)
        })
    }

    fn produce<I>(
        &self,
        input: I,
        queue: &mut Queue,
        lenient: bool,
        diag: &mut Option<&mut dyn Write>,
    ) -> Result<StreamSummary, PipelineError>
    where
        I: IntoIterator<Item = Result<LandmarkSet, ParseError>>,
    {
        let mut state = self.initial_state();
        let mut frames = 0usize;
        let mut errors = 0usize;
        let mut sum = [0.0f64; 3];

        for item in input {
            let outcome = item
                .map_err(PipelineError::from)
                .and_then(|lm| self.transcode_frame(&lm, &mut state));
            match outcome {
                Ok(frame) => {
                    frames += 1;
                    for (acc, c) in sum.iter_mut().zip(frame.pad.to_array()) {
                        *acc += c;
                    }
                    if let Some(out) = diag.as_mut() {
                        writeln!(out, "{}", frame.diag_line())?;
                    }
                    queue.send(frame.rgb);
                }
                Err(e) if lenient => {
                    errors += 1;
                    log::warn!("{e}");
                    if let Some(out) = diag.as_mut() {
                        let (key, at) = match &e {
                            PipelineError::Parse(p) => ("line", p.line as u64),
                            PipelineError::Frame { frame_id, .. } => ("frame", *frame_id),
                            _ => ("frame", frames as u64),
                        };
                        let msg = serde_json::to_string(&e.to_string()).expect("string");
                        writeln!(out, r#"{{"{key}":{at},"error":{msg}}}"#)?;
                    }
                }
                Err(e) => return Err(e),
            }
        }

        let mean_pad = (frames > 0).then(|| {
            let n = frames as f64;
            PadPoint::new(sum[0] / n, sum[1] / n, sum[2] / n)
        });
        Ok(StreamSummary {
            frames,
            errors,
            mean_pad,
            nearest_anchor: mean_pad.map(|p| self.nearest_anchor(p).to_string()),
            nearest_hue: mean_pad
                .and_then(|p| nearest_hue(p, &self.plutchik).ok())
                .map(|(h, _)| h),
            sink_errors: 0,
            dropped: 0,
        })
    }
}

struct Queue {
    tx: Sender<RgbColor>,
    drain: Receiver<RgbColor>,
    mode: DeliveryMode,
    dropped: usize,
}

impl Queue {
    fn send(&mut self, color: RgbColor) {
        match self.mode {
            DeliveryMode::Lossless => {
                // The worker only disconnects after we drop the sender.
                let _ = self.tx.send(color);
            }
            DeliveryMode::Realtime => {
                let mut color = color;
                loop {
                    match self.tx.try_send(color) {
                        Ok(()) => break,
                        Err(TrySendError::Full(c)) => {
                            color = c;
                            if self.drain.try_recv().is_ok() {
                                self.dropped += 1;
                            }
                        }
                        Err(TrySendError::Disconnected(_)) => break,
                    }
                }
            }
        }
    }
}

/// Queue behaviour when the sink falls behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryMode {
    /// Producer blocks; every colour is delivered.
    Lossless,
    /// Oldest queued colour is discarded.
    Realtime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOptions {
    pub lenient: bool,
    /// `None` picks realtime for lossy sinks and lossless otherwise.
    pub delivery: Option<DeliveryMode>,
    pub queue_capacity: usize,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            lenient: false,
            delivery: None,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamSummary {
    pub frames: usize,
    pub errors: usize,
    pub mean_pad: Option<PadPoint>,
    pub nearest_anchor: Option<String>,
    pub nearest_hue: Option<f64>,
    pub sink_errors: usize,
    pub dropped: usize,
}
