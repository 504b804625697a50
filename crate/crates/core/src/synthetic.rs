//! Deterministic synthetic faces for fixtures, demos and benchmarks.
//!
//! [`face_for_pad`] places the landmarks read by the expression formulas as
//! an affine function of a PAD point, so expression vectors of synthetic
//! faces are affine in PAD and a linear affect model can recover it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::affect::{
    build_affect_training_set, train_affect, AffectError, AffectModel, PadAnchorTable, PadPoint,
};
use crate::chroma::{
    build_color_training_set, train_color, ChromaError, ColorModel, ColorTrainingMode,
    PlutchikTable,
};
use crate::expression::{extract_expression, ExpressionVector, LandmarkSet, LANDMARK_COUNT};
use crate::regress::DEFAULT_LAMBDA;

/// Faces per anchor in the demo training set.
pub const DEMO_FACES_PER_LABEL: usize = 20;
pub const DEMO_JITTER_PX: f64 = 0.5;
pub const DEMO_SEED: u64 = 7;
pub const DEMO_STREAM_FRAMES: usize = 100;

/// A frontal face roughly 200 px wide, y down.
pub fn neutral_face() -> LandmarkSet {
    let mut lm = LandmarkSet::zeros(0);
    // Jaw and contour points fill the indices the formulas do not read.
    for i in 0..LANDMARK_COUNT {
        let t = i as f64 / LANDMARK_COUNT as f64 * std::f64::consts::TAU;
        lm.set_point(i, 100.0 + 90.0 * t.cos(), 120.0 + 110.0 * t.sin());
    }
    for (i, x, y) in [
        (0, 70.0, 100.0),
        (1, 70.0, 108.0),
        (12, 82.0, 80.0),
        (13, 60.0, 82.0),
        (16, 40.0, 84.0),
        (22, 70.0, 170.0),
        (25, 100.0, 165.0),
        (28, 130.0, 170.0),
        (31, 100.0, 178.0),
    ] {
        lm.set_point(i, x, y);
    }
    lm
}

/// Face whose eye, brow and mouth points are shifted linearly by `pad`.
pub fn face_for_pad(pad: PadPoint, frame_id: u64) -> LandmarkSet {
    let PadPoint { p, a, d } = pad;
    let mut lm = neutral_face();
    lm.frame_id = frame_id;
    let shift = |lm: &mut LandmarkSet, i: usize, dx: f64, dy: f64| {
        let [x, y] = lm.points()[i];
        lm.set_point(i, x + dx, y + dy);
    };
    // Eyes open with arousal.
    shift(&mut lm, 0, 0.0, -3.0 * a);
    shift(&mut lm, 1, 0.0, a);
    // Brows rise with dominance and arousal.
    shift(&mut lm, 12, 0.0, -4.0 * d + a);
    shift(&mut lm, 13, 0.0, -2.0 * a);
    shift(&mut lm, 16, 0.0, -3.0 * d - 2.0 * p);
    // Mouth widens and corners lift with pleasure; opens with arousal.
    shift(&mut lm, 22, -8.0 * p - 2.0 * a, -5.0 * p);
    shift(&mut lm, 28, 8.0 * p + 2.0 * a, -5.0 * p + 2.0 * d);
    shift(&mut lm, 25, 0.0, -2.0 * a);
    shift(&mut lm, 31, 0.0, 6.0 * a - 2.0 * d);
    lm
}

/// `per_label` jittered faces per anchor, labeled with the anchor name.
pub fn labeled_training_faces(
    anchors: &PadAnchorTable,
    per_label: usize,
    jitter_px: f64,
    seed: u64,
) -> Vec<(ExpressionVector, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, jitter_px.max(0.0)).expect("valid sigma");
    let mut rows = Vec::with_capacity(anchors.len() * per_label);
    for (label, pad) in anchors.entries() {
        for _ in 0..per_label {
            let mut lm = face_for_pad(*pad, rows.len() as u64);
            for i in 0..LANDMARK_COUNT {
                let [x, y] = lm.points()[i];
                lm.set_point(i, x + noise.sample(&mut rng), y + noise.sample(&mut rng));
            }
            let v = extract_expression(&lm).expect("synthetic faces are finite");
            rows.push((v, label.clone()));
        }
    }
    rows
}

/// Neutral face gradually breaking into a smile: PAD ramps linearly from the
/// origin to `target` over `frames` frames, so mouth width grows every frame.
pub fn smile_onset_stream(frames: usize, target: PadPoint) -> Vec<LandmarkSet> {
    (0..frames)
        .map(|i| {
            let t = if frames > 1 {
                i as f64 / (frames - 1) as f64
            } else {
                1.0
            };
            let pad = PadPoint::new(t * target.p, t * target.a, t * target.d);
            face_for_pad(pad, i as u64).with_timestamp(Some(i as i64 * 40))
        })
        .collect()
}

/// Labeled expression rows used to train the demo affect model.
pub fn demo_training_rows() -> Vec<(ExpressionVector, String)> {
    labeled_training_faces(
        &PadAnchorTable::bundled(),
        DEMO_FACES_PER_LABEL,
        DEMO_JITTER_PX,
        DEMO_SEED,
    )
}

/// The 100-frame smile onset ending at the bundled joy anchor.
pub fn demo_stream() -> Vec<LandmarkSet> {
    let joy = PadAnchorTable::bundled()
        .get("joy")
        .expect("bundled joy anchor");
    smile_onset_stream(DEMO_STREAM_FRAMES, joy)
}

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    Affect(#[from] AffectError),
    #[error(transparent)]
    Chroma(#[from] ChromaError),
}

/// Affect model trained on [`demo_training_rows`] and colour model trained
/// on the bundled table, both at the default ridge strength.
pub fn demo_models() -> Result<(AffectModel, ColorModel), DemoError> {
    let ts = build_affect_training_set(&demo_training_rows(), &PadAnchorTable::bundled())?;
    let affect = train_affect(&ts, DEFAULT_LAMBDA)?;
    let pairs = build_color_training_set(&PlutchikTable::bundled(), ColorTrainingMode::Table);
    let color = train_color(&pairs, DEFAULT_LAMBDA)?;
    Ok((affect, color))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mouth_width_tracks_pleasure() {
        let lo = extract_expression(&face_for_pad(PadPoint::new(-0.5, 0.0, 0.0), 0)).unwrap();
        let hi = extract_expression(&face_for_pad(PadPoint::new(0.5, 0.0, 0.0), 0)).unwrap();
        assert!(hi.v[4] > lo.v[4]);
        assert_eq!(hi.v[4] - lo.v[4], 16.0);
    }

    #[test]
    fn smile_stream_is_monotone_in_width() {
        let s = smile_onset_stream(10, PadPoint::new(0.81, 0.51, 0.46));
        let widths: Vec<f64> = s
            .iter()
            .map(|f| extract_expression(f).unwrap().v[4])
            .collect();
        assert!(widths.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(s[9].frame_id, 9);
    }

    #[test]
    fn training_faces_are_reproducible() {
        let anchors = PadAnchorTable::bundled();
        let a = labeled_training_faces(&anchors, 3, 0.5, 1);
        assert_eq!(a.len(), 33);
        assert_eq!(a, labeled_training_faces(&anchors, 3, 0.5, 1));
    }
}
