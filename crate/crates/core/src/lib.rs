//! Facial expression → colour transcoding through a Pleasure/Arousal/Dominance
//! affect space, with a discrete information bottleneck solver for checking
//! the latent-mediation structure on small joint distributions.
//!
//! The pipeline runs in two learned linear stages:
//!
//! 1. [`expression`] turns 40 landmarks into a 7-parameter expression
//!    vector, and [`affect`] maps it to PAD with ridge regression.
//! 2. [`chroma`] maps PAD to HSL (again ridge regression, trained on the
//!    bundled Plutchik table) and converts to RGB.
//!
//! [`pipeline`] chains the stages with PAD smoothing and hands colours to a
//! [`device`] sink speaking a small framed serial protocol.

pub mod affect;
pub mod chroma;
pub mod device;
pub mod expression;
pub mod ib;
pub mod pipeline;
pub mod regress;
pub mod synthetic;

pub use affect::{AffectModel, PadAnchorTable, PadPoint};
pub use chroma::{ColorInterpretation, ColorModel, HslColor, PlutchikTable, RgbColor};
pub use expression::{ExpressionVector, LandmarkSet};
pub use pipeline::{ColorFrame, Transcoder, TranscoderConfig};
pub use regress::LinearModel;
