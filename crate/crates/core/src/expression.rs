//! Landmark ingestion and the 7-parameter expression vector.
//!
//! Coordinates are image pixels with `y` increasing downward. Landmark
//! indices are opaque positions; only the ones read by [`extract_expression`]
//! carry meaning here:
//!
//! | index | used by |
//! |-------|---------|
//! | 0, 1 | eye height, brow terms |
//! | 12, 13, 16 | brow terms |
//! | 22, 25, 28, 31 | mouth terms |

use std::io::BufRead;

use serde::Deserialize;
use thiserror::Error;

pub const LANDMARK_COUNT: usize = 40;
pub const EXPRESSION_DIM: usize = 7;

/// Indices consumed by the expression formulas.
pub const REQUIRED_INDICES: [usize; 9] = [0, 1, 12, 13, 16, 22, 25, 28, 31];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpressionError {
    #[error("invalid landmarks: expected {LANDMARK_COUNT} points, got {0}")]
    WrongCount(usize),
    #[error("invalid landmarks: point {index} is not finite")]
    NonFinite { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

/// How strictly non-finite coordinates are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    /// Only the points read by the expression formulas must be finite.
    #[default]
    Required,
    /// Every point must be finite.
    Strict,
}

/// One frame of 40 facial points.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<[f64; 2]>,
    pub frame_id: u64,
    pub timestamp_ms: Option<i64>,
}

impl LandmarkSet {
    pub fn new(points: Vec<[f64; 2]>, frame_id: u64) -> Result<Self, ExpressionError> {
        let set = LandmarkSet {
            points,
            frame_id,
            timestamp_ms: None,
        };
        set.validate(Validation::Required)?;
        Ok(set)
    }

    pub fn with_timestamp(mut self, timestamp_ms: Option<i64>) -> Self {
        self.timestamp_ms = timestamp_ms;
        self
    }

    pub fn zeros(frame_id: u64) -> Self {
        LandmarkSet {
            points: vec![[0.0, 0.0]; LANDMARK_COUNT],
            frame_id,
            timestamp_ms: None,
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn set_point(&mut self, index: usize, x: f64, y: f64) {
        self.points[index] = [x, y];
    }

    pub fn validate(&self, mode: Validation) -> Result<(), ExpressionError> {
        if self.points.len() != LANDMARK_COUNT {
            return Err(ExpressionError::WrongCount(self.points.len()));
        }
        let finite = |i: usize| self.points[i].iter().all(|c| c.is_finite());
        match mode {
            Validation::Required => REQUIRED_INDICES.iter().copied().try_for_each(|i| {
                if finite(i) {
                    Ok(())
                } else {
                    Err(ExpressionError::NonFinite { index: i })
                }
            }),
            Validation::Strict => (0..LANDMARK_COUNT).try_for_each(|i| {
                if finite(i) {
                    Ok(())
                } else {
                    Err(ExpressionError::NonFinite { index: i })
                }
            }),
        }
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        LandmarkSet {
            points: self
                .points
                .iter()
                .map(|[x, y]| [x * factor, y * factor])
                .collect(),
            frame_id: self.frame_id,
            timestamp_ms: self.timestamp_ms,
        }
    }
}

/// The expression parameters `v0..v6`, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpressionVector {
    pub v: [f64; EXPRESSION_DIM],
    pub frame_id: u64,
}

impl ExpressionVector {
    pub fn new(v: [f64; EXPRESSION_DIM], frame_id: u64) -> Self {
        ExpressionVector { v, frame_id }
    }
}

/// Optional preprocessing applied before extraction. Off by default, since
/// the formulas are defined on raw pixel displacements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtractOptions {
    pub prescale: Option<f64>,
}

/// Computes the expression vector from one landmark frame.
///
/// ```text
/// v0 = (l0.y - l1.y) * 2                     eyes height
/// v1 = l0.y - l13.y + (l16.y - l12.y) / 4    eyes / brows space
/// v2 = l12.y + v1 - l0.y                     inner brow height
/// v3 = l16.y + v1 - l0.y                     outer brow height
/// v4 = l28.x - l22.x                         mouth width
/// v5 = l31.y - l25.y                         mouth openness
/// v6 = (l28.y - l25.y) / 2 - l22.y           mouth twist
/// ```
pub fn extract_expression(lm: &LandmarkSet) -> Result<ExpressionVector, ExpressionError> {
    lm.validate(Validation::Required)?;
    let x = |i: usize| lm.points[i][0];
    let y = |i: usize| lm.points[i][1];

    let v0 = (y(0) - y(1)) * 2.0;
    let v1 = y(0) - y(13) + (y(16) - y(12)) / 4.0;
    let v2 = y(12) + v1 - y(0);
    let v3 = y(16) + v1 - y(0);
    let v4 = x(28) - x(22);
    let v5 = y(31) - y(25);
    let v6 = (y(28) - y(25)) / 2.0 - y(22);

    Ok(ExpressionVector::new(
        [v0, v1, v2, v3, v4, v5, v6],
        lm.frame_id,
    ))
}

pub fn extract_expression_with(
    lm: &LandmarkSet,
    opts: &ExtractOptions,
) -> Result<ExpressionVector, ExpressionError> {
    match opts.prescale {
        Some(s) => extract_expression(&lm.scaled(s)),
        None => extract_expression(lm),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StreamFormat {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Deserialize)]
struct JsonRecord {
    frame: Option<u64>,
    t_ms: Option<i64>,
    pts: Vec<Vec<f64>>,
}

/// Iterator over landmark records of a JSONL or CSV stream.
///
/// Blank lines are ignored, as are CSV lines starting with `#`. Each data
/// line yields one item; a malformed record yields an `Err` and iteration
/// continues, so callers choose between skipping (lenient) and stopping
/// (strict). Records without a frame number are numbered by their ordinal
/// among data lines.
pub struct LandmarkReader<R> {
    lines: std::io::Lines<R>,
    format: StreamFormat,
    validation: Validation,
    line_no: usize,
    ordinal: u64,
}

impl<R: BufRead> LandmarkReader<R> {
    pub fn new(reader: R, format: StreamFormat) -> Self {
        LandmarkReader {
            lines: reader.lines(),
            format,
            validation: Validation::Required,
            line_no: 0,
            ordinal: 0,
        }
    }

    pub fn with_validation(mut self, validation: Validation) -> Self {
        self.validation = validation;
        self
    }

    fn parse_line(&self, line: &str, ordinal: u64) -> Result<LandmarkSet, String> {
        let (points, frame, t_ms) = match self.format {
            StreamFormat::Jsonl => {
                let rec: JsonRecord =
                    serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
                if rec.pts.len() != LANDMARK_COUNT {
                    return Err(format!("expected 40 points, got {}", rec.pts.len()));
                }
                let mut points = Vec::with_capacity(LANDMARK_COUNT);
                for (i, p) in rec.pts.iter().enumerate() {
                    match p.as_slice() {
                        [x, y] => points.push([*x, *y]),
                        _ => return Err(format!("point {i} must be an [x, y] pair")),
                    }
                }
                (points, rec.frame, rec.t_ms)
            }
            StreamFormat::Csv => {
                let fields = line
                    .split(',')
                    .map(|f| {
                        let f = f.trim();
                        f.parse::<f64>()
                            .map_err(|_| format!("non-numeric field {f:?}"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if fields.len() != 2 * LANDMARK_COUNT {
                    if fields.len() % 2 == 0 {
                        return Err(format!("expected 40 points, got {}", fields.len() / 2));
                    }
                    return Err(format!("expected 80 fields, got {}", fields.len()));
                }
                let points = fields.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
                (points, None, None)
            }
        };
        let set = LandmarkSet {
            points,
            frame_id: frame.unwrap_or(ordinal),
            timestamp_ms: t_ms,
        };
        set.validate(self.validation).map_err(|e| e.to_string())?;
        Ok(set)
    }
}

impl<R: BufRead> Iterator for LandmarkReader<R> {
    type Item = Result<LandmarkSet, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.line_no += 1;
                    return Some(Err(ParseError {
                        line: self.line_no,
                        reason: format!("read error: {e}"),
                    }));
                }
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if self.format == StreamFormat::Csv && trimmed.starts_with('#') {
                continue;
            }
            let ordinal = self.ordinal;
            self.ordinal += 1;
            return Some(
                self.parse_line(trimmed, ordinal)
                    .map_err(|reason| ParseError {
                        line: self.line_no,
                        reason,
                    }),
            );
        }
    }
}

/// Reads a whole stream. In strict mode the first malformed record is
/// fatal; in lenient mode malformed records are skipped and returned
/// alongside the parsed frames.
pub fn parse_landmark_stream<R: BufRead>(
    source: R,
    format: StreamFormat,
    lenient: bool,
) -> Result<(Vec<LandmarkSet>, Vec<ParseError>), ParseError> {
    let mut frames = Vec::new();
    let mut skipped = Vec::new();
    for item in LandmarkReader::new(source, format) {
        match item {
            Ok(set) => frames.push(set),
            Err(e) if lenient => {
                log::warn!("skipping malformed landmark record: {e}");
                skipped.push(e);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((frames, skipped))
}

/// Serializes a frame as one JSONL record (without trailing newline).
pub fn to_jsonl_record(lm: &LandmarkSet) -> String {
    let pts = lm
        .points
        .iter()
        .map(|[x, y]| format!("[{},{}]", fmt_num(*x), fmt_num(*y)))
        .collect::<Vec<_>>()
        .join(",");
    match lm.timestamp_ms {
        Some(t) => format!(
            r#"{{"frame":{},"t_ms":{},"pts":[{}]}}"#,
            lm.frame_id, t, pts
        ),
        None => format!(r#"{{"frame":{},"pts":[{}]}}"#, lm.frame_id, pts),
    }
}

fn fmt_num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}
