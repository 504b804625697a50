//! PAD → colour stage.
//!
//! Saturation and lightness come from inverting the linear (L, S) → PAD
//! relation through its left pseudoinverse. Hue comes from the Plutchik
//! table. The trained colour model regresses `(cos h, sin h, s, l)` on PAD so
//! the hue seam at 0°/360° does not distort the fit.

use nalgebra::{DMatrix, Matrix2, Matrix2x3, Matrix3x2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affect::{PadPoint, PAD_DIM};
use crate::regress::{fit_ridge, LinearModel, ModelFile, ModelKind, RegressError};

pub const HUE_ENCODING: &str = "cos_sin";
const COLOR_OUTPUTS: usize = 4;

const BUNDLED_PLUTCHIK: &str = include_str!("../resources/plutchik.json");

#[derive(Debug, Error)]
pub enum ChromaError {
    #[error("colour table is empty")]
    EmptyTable,
    #[error("duplicate colour table label {0:?}")]
    DuplicateLabel(String),
    #[error("HSL out of range: h={h} s={s} l={l}")]
    OutOfRange { h: f64, s: f64, l: f64 },
    #[error(
        "expected a model of kind color with cos_sin hue encoding, 3 inputs and 4 outputs: {0}"
    )]
    WrongModel(String),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error("colour table file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Hue in degrees `[0, 360)`, saturation and lightness in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HslColor {
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

impl HslColor {
    /// Wraps hue and clamps saturation/lightness. Non-finite hue maps to 0.
    pub fn clamped(h: f64, s: f64, l: f64) -> Self {
        let h = if h.is_finite() { wrap_degrees(h) } else { 0.0 };
        let clamp = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 100.0) };
        HslColor {
            h,
            s: clamp(s),
            l: clamp(l),
        }
    }

    pub fn checked(h: f64, s: f64, l: f64) -> Result<Self, ChromaError> {
        let ok =
            (0.0..360.0).contains(&h) && (0.0..=100.0).contains(&s) && (0.0..=100.0).contains(&l);
        if ok {
            Ok(HslColor { h, s, l })
        } else {
            Err(ChromaError::OutOfRange { h, s, l })
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..360.0).contains(&self.h)
            && (0.0..=100.0).contains(&self.s)
            && (0.0..=100.0).contains(&self.l)
    }
}

fn wrap_degrees(h: f64) -> f64 {
    let w = h.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Shortest angular distance in degrees.
pub fn hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbColor {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        RgbColor { r, g, b }
    }
}

/// The fixed (L, S) → (P, A, D) coefficients and their left pseudoinverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehrabianMatrix {
    w: Matrix3x2<f64>,
    pinv: Matrix2x3<f64>,
}

impl Default for MehrabianMatrix {
    fn default() -> Self {
        Self::new()
    }
}

impl MehrabianMatrix {
    /// Rows are P, A, D; columns are L, S.
    pub const COEFFICIENTS: [[f64; 2]; 3] = [[0.69, 0.22], [-0.31, 0.60], [-0.76, 0.32]];

    pub fn new() -> Self {
        let c = Self::COEFFICIENTS;
        let w = Matrix3x2::new(c[0][0], c[0][1], c[1][0], c[1][1], c[2][0], c[2][1]);
        // (WᵀW)⁻¹ Wᵀ with the 2×2 inverse written out.
        let wtw: Matrix2<f64> = w.transpose() * w;
        let det = wtw[(0, 0)] * wtw[(1, 1)] - wtw[(0, 1)] * wtw[(1, 0)];
        let inv = Matrix2::new(wtw[(1, 1)], -wtw[(0, 1)], -wtw[(1, 0)], wtw[(0, 0)]) / det;
        MehrabianMatrix {
            w,
            pinv: inv * w.transpose(),
        }
    }

    pub fn w(&self) -> &Matrix3x2<f64> {
        &self.w
    }

    pub fn pinv(&self) -> &Matrix2x3<f64> {
        &self.pinv
    }

    /// `P = 0.69 L + 0.22 S`, `A = -0.31 L + 0.60 S`, `D = -0.76 L + 0.32 S`.
    pub fn forward(&self, l: f64, s: f64) -> PadPoint {
        let c = Self::COEFFICIENTS;
        PadPoint::new(
            c[0][0] * l + c[0][1] * s,
            c[1][0] * l + c[1][1] * s,
            c[2][0] * l + c[2][1] * s,
        )
    }

    /// Least-squares `(L, S)` for a PAD point, in the PAD-normalized scale.
    pub fn pad_to_sl(&self, e: PadPoint) -> (f64, f64) {
        let ls = self.pinv * Vector3::new(e.p, e.a, e.d);
        (ls[0], ls[1])
    }
}

/// Least-squares `(l_raw, s_raw)` for a PAD point.
pub fn pad_to_sl(e: PadPoint) -> (f64, f64) {
    MehrabianMatrix::new().pad_to_sl(e)
}

/// Maps a raw pseudoinverse output to percent: clamp to `[0, 1]`, then ×100.
pub fn raw_to_percent(raw: f64) -> f64 {
    raw.clamp(0.0, 1.0) * 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlutchikRow {
    pub label: String,
    pub h: f64,
    pub s: f64,
    pub l: f64,
    pub p: f64,
    pub a: f64,
    pub d: f64,
}

impl PlutchikRow {
    pub fn pad(&self) -> PadPoint {
        PadPoint::new(self.p, self.a, self.d)
    }

    pub fn hsl(&self) -> HslColor {
        HslColor {
            h: self.h,
            s: self.s,
            l: self.l,
        }
    }
}

/// Emotion → (hue, saturation, lightness, PAD).
#[derive(Debug, Clone, PartialEq)]
pub struct PlutchikTable {
    rows: Vec<PlutchikRow>,
}

impl PlutchikTable {
    pub fn new(rows: Vec<PlutchikRow>) -> Result<Self, ChromaError> {
        if rows.is_empty() {
            return Err(ChromaError::EmptyTable);
        }
        for (i, row) in rows.iter().enumerate() {
            HslColor::checked(row.h, row.s, row.l)?;
            if rows[..i]
                .iter()
                .any(|r| r.label.eq_ignore_ascii_case(&row.label))
            {
                return Err(ChromaError::DuplicateLabel(row.label.clone()));
            }
        }
        Ok(PlutchikTable { rows })
    }

    /// The 11-row emotion/colour/PAD table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_PLUTCHIK).expect("bundled colour table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ChromaError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("table serializes")
    }

    pub fn rows(&self) -> &[PlutchikRow] {
        &self.rows
    }
}

/// Hue of the table row nearest to `e` in PAD space. Ties go to the earlier
/// row.
pub fn nearest_hue(e: PadPoint, table: &PlutchikTable) -> Result<(f64, &str), ChromaError> {
    let mut best: Option<(&PlutchikRow, f64)> = None;
    for row in &table.rows {
        let dist = e.distance(&row.pad());
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some((row, dist));
        }
    }
    best.map(|(row, _)| (row.h, row.label.as_str()))
        .ok_or(ChromaError::EmptyTable)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorTrainingMode {
    /// Tabulated HSL verbatim.
    #[default]
    Table,
    /// Tabulated hue, pseudoinverse saturation and lightness.
    Hybrid,
}

pub fn build_color_training_set(
    table: &PlutchikTable,
    mode: ColorTrainingMode,
) -> Vec<(PadPoint, HslColor)> {
    let w = MehrabianMatrix::new();
    table
        .rows
        .iter()
        .map(|row| {
            let pad = row.pad();
            let hsl = match mode {
                ColorTrainingMode::Table => row.hsl(),
                ColorTrainingMode::Hybrid => {
                    let (l_raw, s_raw) = w.pad_to_sl(pad);
                    HslColor {
                        h: row.h,
                        s: raw_to_percent(s_raw),
                        l: raw_to_percent(l_raw),
                    }
                }
            };
            (pad, hsl)
        })
        .collect()
}

/// The fitted PAD → colour map. Internally four outputs:
/// `(cos h, sin h, s, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorModel(LinearModel);

impl ColorModel {
    pub fn new(model: LinearModel) -> Result<Self, ChromaError> {
        if model.d_in() != PAD_DIM || model.d_out() != COLOR_OUTPUTS {
            return Err(ChromaError::WrongModel(format!(
                "{} inputs and {} outputs",
                model.d_in(),
                model.d_out()
            )));
        }
        Ok(ColorModel(model))
    }

    pub fn linear(&self) -> &LinearModel {
        &self.0
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile::from_model(&self.0, ModelKind::Color, Some(HUE_ENCODING))
    }

    pub fn from_file(file: &ModelFile) -> Result<Self, ChromaError> {
        if file.kind != ModelKind::Color {
            return Err(ChromaError::WrongModel(format!("kind {:?}", file.kind)));
        }
        if file.hue_encoding.as_deref() != Some(HUE_ENCODING) {
            return Err(ChromaError::WrongModel(format!(
                "hue_encoding {:?}",
                file.hue_encoding
            )));
        }
        Self::new(file.to_model()?)
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, ChromaError> {
        Self::from_file(&ModelFile::from_json(text)?)
    }
}

pub fn train_color(pairs: &[(PadPoint, HslColor)], lambda: f64) -> Result<ColorModel, ChromaError> {
    let x = DMatrix::from_row_iterator(
        pairs.len(),
        PAD_DIM,
        pairs.iter().flat_map(|(e, _)| e.to_array()),
    );
    let y = DMatrix::from_row_iterator(
        pairs.len(),
        COLOR_OUTPUTS,
        pairs.iter().flat_map(|(_, c)| {
            let h = c.h.to_radians();
            [h.cos(), h.sin(), c.s, c.l]
        }),
    );
    ColorModel::new(fit_ridge(&x, &y, lambda)?)
}

fn decode_color(out: &[f64]) -> HslColor {
    let h = out[1].atan2(out[0]).to_degrees();
    HslColor::clamped(h, out[2], out[3])
}

/// Mean colour for a PAD point; always a valid [`HslColor`].
pub fn to_color(model: &ColorModel, e: PadPoint) -> Result<HslColor, ChromaError> {
    Ok(decode_color(&model.0.predict(&e.to_array())?))
}

pub fn sample_color<R: Rng + ?Sized>(
    model: &ColorModel,
    e: PadPoint,
    rng: &mut R,
) -> Result<HslColor, ChromaError> {
    Ok(decode_color(&model.0.sample_with(&e.to_array(), rng)?))
}

/// How the third colour channel is read when converting to RGB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorInterpretation {
    /// Hue / saturation / lightness.
    Hsl,
    /// Hue / saturation / value. Keeps `l = 100` rows saturated instead of
    /// white.
    #[default]
    Hsv,
}

pub fn hsl_to_rgb(c: HslColor, interpretation: ColorInterpretation) -> RgbColor {
    let h = if c.h.is_finite() {
        wrap_degrees(c.h)
    } else {
        0.0
    };
    let s = (c.s / 100.0).clamp(0.0, 1.0);
    let t = (c.l / 100.0).clamp(0.0, 1.0);
    let (chroma, m) = match interpretation {
        ColorInterpretation::Hsl => {
            let chroma = (1.0 - (2.0 * t - 1.0).abs()) * s;
            (chroma, t - chroma / 2.0)
        }
        ColorInterpretation::Hsv => {
            let chroma = t * s;
            (chroma, t - chroma)
        }
    };
    let hp = h / 60.0;
    let x = chroma * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let to_byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    RgbColor::new(to_byte(r1), to_byte(g1), to_byte(b1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    #[test]
    fn pinv_times_w_is_identity() {
        let m = MehrabianMatrix::new();
        let prod = m.pinv() * m.w();
        assert_abs_diff_eq!(prod, Matrix2::identity(), epsilon = 1e-12);
    }

    #[test]
    fn origin_maps_to_origin() {
        assert_eq!(pad_to_sl(PadPoint::new(0.0, 0.0, 0.0)), (0.0, 0.0));
    }

    #[test]
    fn unit_pleasure() {
        // Oracle: numpy.linalg.solve(W.T @ W, W.T @ [1, 0, 0]).
        let (l, s) = pad_to_sl(PadPoint::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(l, 0.810_161_97, epsilon = 1e-6);
        assert_abs_diff_eq!(s, 0.870_671_36, epsilon = 1e-6);
        assert_abs_diff_eq!(l, 0.8102, epsilon = 1e-3);
        assert_abs_diff_eq!(s, 0.8707, epsilon = 1e-3);
    }

    #[test]
    fn forward_then_inverse() {
        let m = MehrabianMatrix::new();
        let (l, s) = m.pad_to_sl(m.forward(0.3, 0.9));
        assert_abs_diff_eq!(l, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(s, 0.9, epsilon = 1e-9);
    }

    #[test]
    fn nearest_hue_exact_anchors() {
        let t = PlutchikTable::bundled();
        assert_eq!(
            nearest_hue(PadPoint::new(0.81, 0.51, 0.46), &t).unwrap(),
            (60.0, "joy")
        );
        assert_eq!(
            nearest_hue(PadPoint::new(-0.62, 0.82, -0.43), &t).unwrap(),
            (120.0, "terror")
        );
    }

    #[test]
    fn nearest_hue_tie_goes_to_first_row() {
        let row = |label: &str, h: f64, p: f64| PlutchikRow {
            label: label.into(),
            h,
            s: 50.0,
            l: 50.0,
            p,
            a: 0.0,
            d: 0.0,
        };
        let t =
            PlutchikTable::new(vec![row("left", 10.0, -0.5), row("right", 200.0, 0.5)]).unwrap();
        assert_eq!(
            nearest_hue(PadPoint::default(), &t).unwrap(),
            (10.0, "left")
        );
        let t =
            PlutchikTable::new(vec![row("right", 200.0, 0.5), row("left", 10.0, -0.5)]).unwrap();
        assert_eq!(
            nearest_hue(PadPoint::default(), &t).unwrap(),
            (200.0, "right")
        );
    }

    #[test]
    fn empty_table_is_rejected() {
        assert!(matches!(
            PlutchikTable::new(vec![]),
            Err(ChromaError::EmptyTable)
        ));
    }

    #[test]
    fn table_mode_pairs() {
        let pairs = build_color_training_set(&PlutchikTable::bundled(), ColorTrainingMode::Table);
        assert_eq!(pairs.len(), 11);
        assert_eq!(pairs[0].0, PadPoint::new(0.81, 0.51, 0.46));
        assert_eq!(
            pairs[0].1,
            HslColor {
                h: 60.0,
                s: 67.0,
                l: 100.0
            }
        );
    }

    #[test]
    fn hybrid_mode_joy() {
        // Oracle (numpy): pinv(W) @ [0.81, 0.51, 0.46] = (L 0.3944285, S 1.4503024).
        let pairs = build_color_training_set(&PlutchikTable::bundled(), ColorTrainingMode::Hybrid);
        let joy = pairs[0].1;
        assert_eq!(joy.h, 60.0);
        assert_abs_diff_eq!(joy.l, 39.44285, epsilon = 1e-4);
        assert_eq!(joy.s, 100.0);
    }

    fn constant_color_model(h: f64, s: f64, l: f64) -> ColorModel {
        let hr = f64::to_radians(h);
        ColorModel::new(LinearModel {
            weights: DMatrix::zeros(4, 3),
            bias: DVector::from_vec(vec![hr.cos(), hr.sin(), s, l]),
            input_mean: DVector::zeros(3),
            input_scale: DVector::from_element(3, 1.0),
            lambda: 0.0,
            noise_cov_diag: DVector::zeros(4),
        })
        .unwrap()
    }

    #[test]
    fn constant_model_gives_joy_color() {
        let m = constant_color_model(60.0, 67.0, 100.0);
        for e in [PadPoint::default(), PadPoint::new(-1.0, 0.3, 0.9)] {
            let c = to_color(&m, e).unwrap();
            assert_abs_diff_eq!(c.h, 60.0, epsilon = 1e-9);
            assert_eq!((c.s, c.l), (67.0, 100.0));
        }
    }

    #[test]
    fn single_pair_is_reproduced() {
        let pair = (
            PadPoint::new(0.2, -0.4, 0.1),
            HslColor {
                h: 300.0,
                s: 40.0,
                l: 70.0,
            },
        );
        let m = train_color(&[pair], 1e-3).unwrap();
        let c = to_color(&m, pair.0).unwrap();
        assert_abs_diff_eq!(c.h, 300.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.s, 40.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.l, 70.0, epsilon = 1e-9);
    }

    #[test]
    fn hue_regression_respects_the_seam() {
        // Hues straddling 0°: a naive angle fit would average to 180°.
        let pairs: Vec<_> = [(-0.5, 350.0), (0.0, 0.0), (0.5, 10.0)]
            .iter()
            .map(|&(p, h)| {
                (
                    PadPoint::new(p, 0.0, 0.0),
                    HslColor {
                        h,
                        s: 50.0,
                        l: 50.0,
                    },
                )
            })
            .collect();
        // A and D are constant, so the unregularized system is singular.
        let err = train_color(&pairs, 0.0).unwrap_err();
        assert!(matches!(
            err,
            ChromaError::Regress(RegressError::SingularSystem)
        ));
        let m = train_color(&pairs, 1e-6).unwrap();
        let c = to_color(&m, PadPoint::new(0.0, 0.0, 0.0)).unwrap();
        assert!(hue_distance(c.h, 0.0) < 1.0, "hue {}", c.h);
    }

    #[test]
    fn color_model_file_checks_encoding() {
        let m = constant_color_model(10.0, 20.0, 30.0);
        let mut f = m.to_file();
        assert_eq!(f.hue_encoding.as_deref(), Some("cos_sin"));
        assert_eq!(ColorModel::from_file(&f).unwrap(), m);
        f.hue_encoding = None;
        assert!(ColorModel::from_file(&f).is_err());
    }

    #[test]
    fn rgb_anchors() {
        let hsl = ColorInterpretation::Hsl;
        let red = HslColor {
            h: 0.0,
            s: 100.0,
            l: 50.0,
        };
        assert_eq!(hsl_to_rgb(red, hsl), RgbColor::new(255, 0, 0));
        for l in [0.0, 12.5, 50.0, 77.0, 100.0] {
            let v = (255.0 * l / 100.0_f64).round() as u8;
            assert_eq!(
                hsl_to_rgb(
                    HslColor {
                        h: 200.0,
                        s: 0.0,
                        l
                    },
                    hsl
                ),
                RgbColor::new(v, v, v)
            );
        }
    }

    #[test]
    fn joy_triple_under_both_readings() {
        let joy = HslColor {
            h: 60.0,
            s: 67.0,
            l: 100.0,
        };
        assert_eq!(
            hsl_to_rgb(joy, ColorInterpretation::Hsl),
            RgbColor::new(255, 255, 255)
        );
        // V = 1, S = 0.67: blue channel = 255 · (1 - 0.67) = 84.15.
        assert_eq!(
            hsl_to_rgb(joy, ColorInterpretation::Hsv),
            RgbColor::new(255, 255, 84)
        );
    }

    #[test]
    fn primaries() {
        for (h, rgb) in [
            (0.0, RgbColor::new(255, 0, 0)),
            (120.0, RgbColor::new(0, 255, 0)),
            (240.0, RgbColor::new(0, 0, 255)),
        ] {
            let c = HslColor {
                h,
                s: 100.0,
                l: 50.0,
            };
            assert_eq!(hsl_to_rgb(c, ColorInterpretation::Hsl), rgb);
        }
    }

    #[test]
    fn hsl_clamping() {
        let c = HslColor::clamped(-30.0, 140.0, -5.0);
        assert_eq!(
            c,
            HslColor {
                h: 330.0,
                s: 100.0,
                l: 0.0
            }
        );
        assert_eq!(HslColor::clamped(720.0, 5.0, 5.0).h, 0.0);
        assert!(HslColor::checked(360.0, 0.0, 0.0).is_err());
        assert_eq!(wrap_degrees(-1e-20), 0.0);
    }
}
