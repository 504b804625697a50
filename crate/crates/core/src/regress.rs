//! Closed-form multivariate ridge regression with a diagonal Gaussian
//! residual model.
//!
//! Inputs are standardized per column before the fit, the intercept is
//! carried as an extra unpenalized column, and the residual variance of each
//! output is kept so predictions can be sampled as `mean + N(0, diag)`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Relative eigenvalue floor below which an unregularized Gram matrix is
/// treated as rank-deficient.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular system: the Gram matrix is rank-deficient and lambda is 0")]
    SingularSystem,
    #[error("no training samples")]
    EmptyData,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("lambda must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Fitted linear map `y = W · standardize(x) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// `d_out × d_in`, applied to standardized inputs.
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub input_mean: DVector<f64>,
    pub input_scale: DVector<f64>,
    pub lambda: f64,
    /// Per-output mean squared training residual.
    pub noise_cov_diag: DVector<f64>,
}

/// Fits a ridge model on `x` (`n × d_in`) and `y` (`n × d_out`).
///
/// Zero-variance input columns keep scale 1. With `lambda == 0` a
/// rank-deficient system is an error rather than a pseudo-inverse.
pub fn fit_ridge(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lambda: f64,
) -> Result<LinearModel, RegressError> {
    let n = x.nrows();
    if n == 0 {
        return Err(RegressError::EmptyData);
    }
    if y.nrows() != n {
        return Err(RegressError::DimensionMismatch(format!(
            "{} input rows but {} target rows",
            n,
            y.nrows()
        )));
    }
    let (d_in, d_out) = (x.ncols(), y.ncols());
    if d_in == 0 || d_out == 0 {
        return Err(RegressError::DimensionMismatch(
            "inputs and targets need at least one column".into(),
        ));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(RegressError::InvalidLambda(lambda));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFinite("inputs"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFinite("targets"));
    }

    let nf = n as f64;
    let input_mean = DVector::from_iterator(d_in, x.column_iter().map(|c| c.sum() / nf));
    let input_scale = DVector::from_iterator(
        d_in,
        x.column_iter().zip(input_mean.iter()).map(|(c, m)| {
            let var = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / nf;
            let sd = var.sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        }),
    );

    // Design matrix [Z | 1].
    let mut g = DMatrix::<f64>::zeros(n, d_in + 1);
    for i in 0..n {
        for j in 0..d_in {
            g[(i, j)] = (x[(i, j)] - input_mean[j]) / input_scale[j];
        }
        g[(i, d_in)] = 1.0;
    }

    let gt = g.transpose();
    let mut gram = &gt * &g;
    for j in 0..d_in {
        gram[(j, j)] += lambda;
    }
    let rhs = &gt * y;

    if lambda == 0.0 {
        let eig = SymmetricEigen::new(gram.clone());
        let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        let min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min.is_nan() || min <= max * RANK_TOL {
            return Err(RegressError::SingularSystem);
        }
    }
    let coef = Cholesky::new(gram)
        .ok_or(RegressError::SingularSystem)?
        .solve(&rhs);

    let weights = coef.rows(0, d_in).transpose();
    let bias = coef.row(d_in).transpose();

    let fitted = &g * &coef;
    let noise_cov_diag = DVector::from_iterator(
        d_out,
        (0..d_out).map(|k| {
            (0..n)
                .map(|i| {
                    let r = y[(i, k)] - fitted[(i, k)];
                    r * r
                })
                .sum::<f64>()
                / nf
        }),
    );

    Ok(LinearModel {
        weights,
        bias,
        input_mean,
        input_scale,
        lambda,
        noise_cov_diag,
    })
}

impl LinearModel {
    pub fn d_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.weights.nrows()
    }

    /// Mean prediction.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, RegressError> {
        if x.len() != self.d_in() {
            return Err(RegressError::DimensionMismatch(format!(
                "model expects {} inputs, got {}",
                self.d_in(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(RegressError::NonFinite("prediction input"));
        }
        let out = (0..self.d_out())
            .map(|k| {
                let mut acc = self.bias[k];
                for (j, xj) in x.iter().enumerate() {
                    acc += self.weights[(k, j)] * (xj - self.input_mean[j]) / self.input_scale[j];
                }
                acc
            })
            .collect();
        Ok(out)
    }

    /// Mean prediction plus independent Gaussian residual noise, reproducible
    /// for a given seed.
    pub fn sample(&self, x: &[f64], rng_seed: u64) -> Result<Vec<f64>, RegressError> {
        self.sample_with(x, &mut ChaCha8Rng::seed_from_u64(rng_seed))
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        rng: &mut R,
    ) -> Result<Vec<f64>, RegressError> {
        let mut y = self.predict(x)?;
        for (yk, var) in y.iter_mut().zip(self.noise_cov_diag.iter()) {
            let z: f64 = StandardNormal.sample(rng);
            if *var > 0.0 {
                *yk += var.sqrt() * z;
            }
        }
        Ok(y)
    }

    /// Per-output training RMSE.
    pub fn residual_rmse(&self) -> Vec<f64> {
        self.noise_cov_diag.iter().map(|v| v.sqrt()).collect()
    }

    /// Squared Frobenius norm of the standardized weights.
    pub fn weight_norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn validate(&self) -> Result<(), RegressError> {
        let (d_out, d_in) = self.weights.shape();
        if d_in == 0 || d_out == 0 {
            return Err(RegressError::InvalidModel("empty weight matrix".into()));
        }
        if self.bias.len() != d_out || self.noise_cov_diag.len() != d_out {
            return Err(RegressError::InvalidModel(
                "bias/noise length differs from d_out".into(),
            ));
        }
        if self.input_mean.len() != d_in || self.input_scale.len() != d_in {
            return Err(RegressError::InvalidModel(
                "standardization length differs from d_in".into(),
            ));
        }
        let all = self
            .weights
            .iter()
            .chain(self.bias.iter())
            .chain(self.input_mean.iter())
            .chain(self.input_scale.iter())
            .chain(self.noise_cov_diag.iter());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(RegressError::InvalidModel("non-finite entry".into()));
        }
        if self.input_scale.iter().any(|s| *s <= 0.0) {
            return Err(RegressError::InvalidModel("input_scale must be > 0".into()));
        }
        if self.noise_cov_diag.iter().any(|s| *s < 0.0) {
            return Err(RegressError::InvalidModel(
                "noise_cov_diag must be >= 0".into(),
            ));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(RegressError::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Affect,
    Color,
}

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub d_in: usize,
    pub d_out: usize,
    pub lambda: f64,
    /// Row-major, `d_out` rows of `d_in` values.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub input_mean: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub noise_cov_diag: Vec<f64>,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hue_encoding: Option<String>,
}

impl ModelFile {
    pub fn from_model(model: &LinearModel, kind: ModelKind, hue_encoding: Option<&str>) -> Self {
        ModelFile {
            d_in: model.d_in(),
            d_out: model.d_out(),
            lambda: model.lambda,
            weights: model
                .weights
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            bias: model.bias.iter().copied().collect(),
            input_mean: model.input_mean.iter().copied().collect(),
            input_scale: model.input_scale.iter().copied().collect(),
            noise_cov_diag: model.noise_cov_diag.iter().copied().collect(),
            kind,
            hue_encoding: hue_encoding.map(str::to_owned),
        }
    }

    pub fn to_model(&self) -> Result<LinearModel, RegressError> {
        if self.weights.len() != self.d_out || self.weights.iter().any(|r| r.len() != self.d_in) {
            return Err(RegressError::InvalidModel(format!(
                "weights must be {} rows of {} values",
                self.d_out, self.d_in
            )));
        }
        let model = LinearModel {
            weights: DMatrix::from_row_iterator(
                self.d_out,
                self.d_in,
                self.weights.iter().flatten().copied(),
            ),
            bias: DVector::from_vec(self.bias.clone()),
            input_mean: DVector::from_vec(self.input_mean.clone()),
            input_scale: DVector::from_vec(self.input_scale.clone()),
            lambda: self.lambda,
            noise_cov_diag: DVector::from_vec(self.noise_cov_diag.clone()),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RegressError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional_slope() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 5.0]);
        let y = x.map(|v| 2.0 * v);
        let m = fit_ridge(&x, &y, 0.0).unwrap();
        assert_abs_diff_eq!(m.predict(&[3.0]).unwrap()[0], 6.0, epsilon = 1e-8);
    }

    #[test]
    fn zero_weights_return_bias() {
        let m = LinearModel {
            weights: DMatrix::zeros(2, 3),
            bias: DVector::from_vec(vec![0.5, -1.0]),
            input_mean: DVector::zeros(3),
            input_scale: DVector::from_element(3, 1.0),
            lambda: 0.0,
            noise_cov_diag: DVector::zeros(2),
        };
        assert_eq!(m.predict(&[9.0, -4.0, 1e6]).unwrap(), vec![0.5, -1.0]);
    }

    #[test]
    fn single_sample_is_interpolated() {
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let y = DMatrix::from_row_slice(1, 2, &[4.0, -5.0]);
        let m = fit_ridge(&x, &y, 0.1).unwrap();
        let p = m.predict(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(p[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], -5.0, epsilon = 1e-12);
    }

    #[test]
    fn huge_lambda_shrinks_to_mean() {
        let x = DMatrix::from_fn(6, 2, |i, j| (i * (j + 1)) as f64 + (j as f64) * 0.3);
        let y = DMatrix::from_fn(6, 2, |i, j| (i as f64) * (1.0 + j as f64) - 2.0);
        let m = fit_ridge(&x, &y, 1e12).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() <= 1e-6));
        for k in 0..2 {
            assert_abs_diff_eq!(m.bias[k], y.column(k).mean(), epsilon = 1e-6);
        }
    }

    #[test]
    fn rank_deficient_without_ridge_is_singular() {
        // Second column duplicates the first.
        let x = DMatrix::from_fn(5, 2, |i, _| i as f64);
        let y = DMatrix::from_fn(5, 1, |i, _| i as f64);
        assert!(matches!(
            fit_ridge(&x, &y, 0.0),
            Err(RegressError::SingularSystem)
        ));
        assert!(fit_ridge(&x, &y, 1e-3).is_ok());
    }

    #[test]
    fn shape_errors() {
        let x = DMatrix::zeros(3, 2);
        let y = DMatrix::zeros(4, 1);
        assert!(matches!(
            fit_ridge(&x, &y, 1.0),
            Err(RegressError::DimensionMismatch(_))
        ));
        assert!(matches!(
            fit_ridge(&DMatrix::zeros(0, 2), &DMatrix::zeros(0, 1), 1.0),
            Err(RegressError::EmptyData)
        ));
        assert!(matches!(
            fit_ridge(&DMatrix::zeros(3, 2), &DMatrix::zeros(3, 1), -1.0),
            Err(RegressError::InvalidLambda(_))
        ));
        let m = fit_ridge(
            &DMatrix::from_element(2, 1, 1.0),
            &DMatrix::zeros(2, 1),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            m.predict(&[1.0, 2.0]),
            Err(RegressError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn zero_noise_sample_equals_predict() {
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]);
        let y = x.map(|v| 3.0 * v + 1.0);
        let m = fit_ridge(&x, &y, 0.0).unwrap();
        let mut m = m;
        m.noise_cov_diag.fill(0.0);
        assert_eq!(m.sample(&[1.5], 42).unwrap(), m.predict(&[1.5]).unwrap());
    }

    #[test]
    fn sampling_is_seeded() {
        let mut m = fit_ridge(
            &DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 2.0]),
            &DMatrix::from_column_slice(3, 1, &[0.0, 2.0, 1.0]),
            0.0,
        )
        .unwrap();
        m.noise_cov_diag[0] = 0.25;
        assert_eq!(m.sample(&[1.0], 9).unwrap(), m.sample(&[1.0], 9).unwrap());
        assert_ne!(m.sample(&[1.0], 9).unwrap(), m.sample(&[1.0], 10).unwrap());
    }

    #[test]
    fn model_file_rejects_bad_shapes() {
        let m = fit_ridge(
            &DMatrix::from_element(2, 1, 1.0),
            &DMatrix::zeros(2, 1),
            1.0,
        )
        .unwrap();
        let mut f = ModelFile::from_model(&m, ModelKind::Affect, None);
        f.weights.push(vec![0.0]);
        assert!(matches!(f.to_model(), Err(RegressError::InvalidModel(_))));
        let mut f = ModelFile::from_model(&m, ModelKind::Affect, None);
        f.input_scale[0] = 0.0;
        assert!(f.to_model().is_err());
    }
}
