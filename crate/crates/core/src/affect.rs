//! Expression → PAD stage: anchor tables, training-set assembly, and the
//! affect regression.

use std::io::BufRead;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expression::{ExpressionVector, EXPRESSION_DIM};
use crate::regress::{fit_ridge, LinearModel, ModelFile, ModelKind, RegressError};

pub const PAD_DIM: usize = 3;

const BUNDLED_ANCHORS: &str = include_str!("../resources/anchors.json");

#[derive(Debug, Error)]
pub enum AffectError {
    #[error("row {row}: unknown emotion label {label:?}")]
    UnknownLabel { row: usize, label: String },
    #[error("duplicate anchor label {0:?}")]
    DuplicateLabel(String),
    #[error("anchor table needs at least 2 entries, got {0}")]
    TooFewAnchors(usize),
    #[error("PAD component out of [-1, 1]: {0:?}")]
    OutOfRange([f64; 3]),
    #[error("non-finite PAD component")]
    NonFinite,
    #[error("expected a model of kind affect with 7 inputs and 3 outputs, got {0}")]
    WrongModel(String),
    #[error("training data line {line}: {reason}")]
    Data { line: usize, reason: String },
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error("anchor file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A point in Pleasure/Arousal/Dominance space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PadPoint {
    pub p: f64,
    pub a: f64,
    pub d: f64,
}

impl PadPoint {
    pub const fn new(p: f64, a: f64, d: f64) -> Self {
        PadPoint { p, a, d }
    }

    pub fn from_array([p, a, d]: [f64; 3]) -> Self {
        PadPoint { p, a, d }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.p, self.a, self.d]
    }

    /// Rejects non-finite or out-of-range components.
    pub fn checked(p: f64, a: f64, d: f64) -> Result<Self, AffectError> {
        let pt = PadPoint { p, a, d };
        if !pt.is_finite() {
            return Err(AffectError::NonFinite);
        }
        if !pt.in_range() {
            return Err(AffectError::OutOfRange(pt.to_array()));
        }
        Ok(pt)
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.a.is_finite() && self.d.is_finite()
    }

    pub fn in_range(&self) -> bool {
        self.to_array().iter().all(|c| (-1.0..=1.0).contains(c))
    }

    pub fn clamped(self) -> Self {
        PadPoint {
            p: self.p.clamp(-1.0, 1.0),
            a: self.a.clamp(-1.0, 1.0),
            d: self.d.clamp(-1.0, 1.0),
        }
    }

    pub fn distance(&self, other: &PadPoint) -> f64 {
        let (dp, da, dd) = (self.p - other.p, self.a - other.a, self.d - other.d);
        (dp * dp + da * da + dd * dd).sqrt()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AnchorRecord {
    label: String,
    p: f64,
    a: f64,
    d: f64,
}

/// Emotion label → PAD coordinates. Lookup is case-insensitive.
#[derive(Debug, Clone, PartialEq)]
pub struct PadAnchorTable {
    entries: Vec<(String, PadPoint)>,
}

impl PadAnchorTable {
    pub fn new(entries: Vec<(String, PadPoint)>) -> Result<Self, AffectError> {
        if entries.len() < 2 {
            return Err(AffectError::TooFewAnchors(entries.len()));
        }
        for (i, (label, pad)) in entries.iter().enumerate() {
            if !pad.is_finite() {
                return Err(AffectError::NonFinite);
            }
            if entries[..i]
                .iter()
                .any(|(other, _)| other.eq_ignore_ascii_case(label))
            {
                return Err(AffectError::DuplicateLabel(label.clone()));
            }
        }
        Ok(PadAnchorTable { entries })
    }

    /// PAD columns of the bundled Plutchik colour table.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_ANCHORS).expect("bundled anchor table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, AffectError> {
        let records: Vec<AnchorRecord> = serde_json::from_str(text)?;
        Self::new(
            records
                .into_iter()
                .map(|r| (r.label, PadPoint::new(r.p, r.a, r.d)))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let records: Vec<AnchorRecord> = self
            .entries
            .iter()
            .map(|(label, pad)| AnchorRecord {
                label: label.clone(),
                p: pad.p,
                a: pad.a,
                d: pad.d,
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("anchors serialize")
    }

    pub fn get(&self, label: &str) -> Option<PadPoint> {
        self.entries
            .iter()
            .find(|(l, _)| l.eq_ignore_ascii_case(label))
            .map(|(_, p)| *p)
    }

    pub fn entries(&self) -> &[(String, PadPoint)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffectTrainingSet {
    pub rows: Vec<(ExpressionVector, PadPoint)>,
}

impl AffectTrainingSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn build_affect_training_set(
    labeled: &[(ExpressionVector, String)],
    anchors: &PadAnchorTable,
) -> Result<AffectTrainingSet, AffectError> {
    let rows = labeled
        .iter()
        .enumerate()
        .map(|(row, (v, label))| {
            anchors
                .get(label)
                .map(|pad| (*v, pad))
                .ok_or_else(|| AffectError::UnknownLabel {
                    row,
                    label: label.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AffectTrainingSet { rows })
}

/// The fitted expression → PAD map.
#[derive(Debug, Clone, PartialEq)]
pub struct AffectModel(LinearModel);

impl AffectModel {
    pub fn new(model: LinearModel) -> Result<Self, AffectError> {
        if model.d_in() != EXPRESSION_DIM || model.d_out() != PAD_DIM {
            return Err(AffectError::WrongModel(format!(
                "{} inputs and {} outputs",
                model.d_in(),
                model.d_out()
            )));
        }
        Ok(AffectModel(model))
    }

    pub fn linear(&self) -> &LinearModel {
        &self.0
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile::from_model(&self.0, ModelKind::Affect, None)
    }

    pub fn from_file(file: &ModelFile) -> Result<Self, AffectError> {
        if file.kind != ModelKind::Affect {
            return Err(AffectError::WrongModel(format!("kind {:?}", file.kind)));
        }
        Self::new(file.to_model()?)
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, AffectError> {
        Self::from_file(&ModelFile::from_json(text)?)
    }
}

pub fn train_affect(ts: &AffectTrainingSet, lambda: f64) -> Result<AffectModel, AffectError> {
    if ts.len() < EXPRESSION_DIM + 1 {
        log::warn!(
            "affect training set has {} rows; at least {} recommended",
            ts.len(),
            EXPRESSION_DIM + 1
        );
    }
    let x = DMatrix::from_row_iterator(
        ts.len(),
        EXPRESSION_DIM,
        ts.rows.iter().flat_map(|(v, _)| v.v),
    );
    let y = DMatrix::from_row_iterator(
        ts.len(),
        PAD_DIM,
        ts.rows.iter().flat_map(|(_, pad)| pad.to_array()),
    );
    AffectModel::new(fit_ridge(&x, &y, lambda)?)
}

/// Mean PAD prediction, optionally clamped into `[-1, 1]³`.
pub fn to_pad(
    model: &AffectModel,
    v: &ExpressionVector,
    clamp: bool,
) -> Result<PadPoint, AffectError> {
    let out = model.0.predict(&v.v)?;
    let pad = PadPoint::new(out[0], out[1], out[2]);
    Ok(if clamp { pad.clamped() } else { pad })
}

/// PAD drawn from the fitted Gaussian residual model.
pub fn sample_pad<R: Rng + ?Sized>(
    model: &AffectModel,
    v: &ExpressionVector,
    clamp: bool,
    rng: &mut R,
) -> Result<PadPoint, AffectError> {
    let out = model.0.sample_with(&v.v, rng)?;
    let pad = PadPoint::new(out[0], out[1], out[2]);
    Ok(if clamp { pad.clamped() } else { pad })
}

/// Reads labeled expression rows: 7 numeric columns then a label. A first
/// line whose leading field is not numeric is taken as a header.
pub fn read_labeled_expressions<R: BufRead>(
    source: R,
) -> Result<Vec<(ExpressionVector, String)>, AffectError> {
    let mut rows = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if rows.is_empty() && fields[0].parse::<f64>().is_err() && idx == 0 {
            continue;
        }
        if fields.len() != EXPRESSION_DIM + 1 {
            return Err(AffectError::Data {
                line: line_no,
                reason: format!("expected 8 columns, got {}", fields.len()),
            });
        }
        let mut v = [0.0; EXPRESSION_DIM];
        for (k, f) in fields[..EXPRESSION_DIM].iter().enumerate() {
            v[k] = f.parse::<f64>().map_err(|_| AffectError::Data {
                line: line_no,
                reason: format!("column {} is not numeric: {f:?}", k + 1),
            })?;
        }
        let frame_id = rows.len() as u64;
        rows.push((
            ExpressionVector::new(v, frame_id),
            fields[EXPRESSION_DIM].to_string(),
        ));
    }
    Ok(rows)
}

pub fn write_labeled_expressions(rows: &[(ExpressionVector, String)]) -> String {
    let mut out = String::from("v0,v1,v2,v3,v4,v5,v6,label\n");
    for (v, label) in rows {
        let nums: Vec<String> =
            v.v.iter()
                .map(|x| serde_json::to_string(x).expect("finite"))
                .collect();
        out.push_str(&nums.join(","));
        out.push(',');
        out.push_str(label);
        out.push('\n');
    }
    out
}
