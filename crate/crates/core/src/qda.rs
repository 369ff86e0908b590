//! Gaussian class models and the quadratic discriminant rule.
//!
//! Each class contributes a score
//!
//! ```text
//! g_k(z) = log π_k - ½ log det Σ_k - ½ (z - μ_k)ᵀ Σ_k⁻¹ (z - μ_k)
//! ```
//!
//! so the pairwise log discriminant is `D_{k',k}(z) = g_{k'}(z) - g_k(z)`.
//! The `-(dim/2) log 2π` constant is common to all classes and omitted.
//! Classification takes the arg max of the scores; ties go to the class that
//! comes first in model order.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, column_means, sample_covariance, CholeskyFactor, Matrix, SymmetricMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClassModel {
    /// Class index into the owning dataset's class names.
    pub label: usize,
    pub prior: f64,
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub cov_factor: CholeskyFactor,
}

impl GaussianClassModel {
    pub fn new(label: usize, prior: f64, mean: Vec<f64>, cov_factor: CholeskyFactor) -> Result<Self> {
        if !(prior > 0.0 && prior < 1.0) {
            return Err(Error::InvalidParameter(format!("prior {prior} outside (0, 1)")));
        }
        if cov_factor.dim() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: cov_factor.dim(),
            });
        }
        Ok(GaussianClassModel {
            label,
            prior,
            log_prior: prior.ln(),
            mean,
            cov_factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `g_k(z)`; `scratch` must have length `dim`.
    #[inline]
    pub(crate) fn score_with(&self, z: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(z.iter().zip(&self.mean).map(|(a, b)| a - b));
        let q = self
            .cov_factor
            .solve_quadratic_form(scratch)
            .expect("dimension checked by caller");
        self.log_prior - 0.5 * self.cov_factor.log_det() - 0.5 * q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaModel {
    classes: Vec<GaussianClassModel>,
}

/// Index of the first maximum.
pub fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

impl QdaModel {
    pub fn from_classes(classes: Vec<GaussianClassModel>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::InvalidParameter("QDA needs at least two classes".into()));
        }
        let dim = classes[0].dim();
        for c in &classes {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
        }
        let total: f64 = classes.iter().map(|c| c.prior).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("priors sum to {total}, not 1")));
        }
        let mut labels: Vec<usize> = classes.iter().map(|c| c.label).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != classes.len() {
            return Err(Error::InvalidParameter("class labels must be distinct".into()));
        }
        Ok(QdaModel { classes })
    }

    /// Known-parameter model from `(prior, mean, covariance)` triples; class `k` gets label `k`.
    pub fn from_parameters(params: &[(f64, Vec<f64>, SymmetricMatrix)]) -> Result<Self> {
        let classes = params
            .iter()
            .enumerate()
            .map(|(k, (prior, mean, cov))| {
                let f = cholesky(cov).map_err(|_| Error::SingularCovariance { label: k.to_string() })?;
                GaussianClassModel::new(k, *prior, mean.clone(), f)
            })
            .collect::<Result<Vec<_>>>()?;
        QdaModel::from_classes(classes)
    }

    /// Fits class priors, means and covariances (`n_k - 1` denominator).
    pub fn fit(data: &Dataset) -> Result<Self> {
        QdaModel::fit_with_ridge(data, 0.0)
    }

    /// As [`QdaModel::fit`], adding `ridge · I` to each covariance before factoring.
    pub fn fit_with_ridge(data: &Dataset, ridge: f64) -> Result<Self> {
        let blocks: Vec<Matrix> = (0..data.n_classes()).map(|k| data.class_matrix(k)).collect();
        fit_class_blocks(&blocks, data.class_names(), ridge)
    }

    pub fn classes(&self) -> &[GaussianClassModel] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.classes[0].dim()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.prior).collect()
    }

    pub fn class_scores(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        let mut out = vec![0.0; self.n_classes()];
        let mut scratch = Vec::with_capacity(z.len());
        self.scores_into(z, &mut out, &mut scratch);
        Ok(out)
    }

    /// Writes one score per class into `out`; `z` must have the model dimension.
    #[inline]
    pub(crate) fn scores_into(&self, z: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        for (o, c) in out.iter_mut().zip(&self.classes) {
            *o = c.score_with(z, scratch);
        }
    }

    /// `D_{a,b}(z) = g_a(z) - g_b(z)`.
    pub fn discriminant(&self, z: &[f64], a: usize, b: usize) -> Result<f64> {
        let s = self.class_scores(z)?;
        Ok(s[a] - s[b])
    }

    /// Returns the label of the highest-scoring class.
    pub fn classify(&self, z: &[f64]) -> Result<usize> {
        let s = self.class_scores(z)?;
        Ok(self.classes[argmax_first(&s)].label)
    }
}

/// Fits a QDA model from one block of rows per class.
pub(crate) fn fit_class_blocks(blocks: &[Matrix], names: &[String], ridge: f64) -> Result<QdaModel> {
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge must be >= 0, got {ridge}")));
    }
    let n: usize = blocks.iter().map(Matrix::rows).sum();
    let mut classes = Vec::with_capacity(blocks.len());
    for (k, x) in blocks.iter().enumerate() {
        let dim = x.cols();
        if x.rows() <= dim {
            return Err(Error::TooFewSamplesForClass {
                label: names[k].clone(),
                count: x.rows(),
                required: dim + 1,
            });
        }
        let mean = column_means(x);
        let mut cov = sample_covariance(x, &mean)?;
        if ridge > 0.0 {
            cov.add_to_diagonal(ridge);
        }
        let factor = cholesky(&cov).map_err(|_| Error::SingularCovariance {
            label: names[k].clone(),
        })?;
        classes.push(GaussianClassModel {
            label: k,
            prior: x.rows() as f64 / n as f64,
            log_prior: (x.rows() as f64 / n as f64).ln(),
            mean,
            cov_factor: factor,
        });
    }
    QdaModel::from_classes(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar_model(var0: f64, var1: f64) -> QdaModel {
        QdaModel::from_parameters(&[
            (0.5, vec![0.0], SymmetricMatrix::from_rows(&[[var0]]).unwrap()),
            (0.5, vec![0.0], SymmetricMatrix::from_rows(&[[var1]]).unwrap()),
        ])
        .unwrap()
    }

    fn normal_density(z: f64, mean: f64, var: f64) -> f64 {
        (-(z - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    #[test]
    fn priors_from_class_counts() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [3.0], [10.0], [12.0], [11.5]]).unwrap();
        let d = Dataset::new(x, vec![0, 0, 0, 1, 1, 1], vec!["a".into(), "b".into()]).unwrap();
        let m = QdaModel::fit(&d).unwrap();
        assert_eq!(m.priors(), vec![0.5, 0.5]);
    }

    #[test]
    fn mean_and_variance_estimates() {
        let x = Matrix::from_rows(&[[0.0], [2.0], [5.0], [6.0], [9.0]]).unwrap();
        let d = Dataset::new(x, vec![0, 0, 1, 1, 1], vec!["a".into(), "b".into()]).unwrap();
        let m = QdaModel::fit(&d).unwrap();
        let c0 = &m.classes()[0];
        assert_eq!(c0.mean, vec![1.0]);
        assert!((c0.cov_factor.log_det() - 2f64.ln()).abs() < 1e-15);
        assert!((c0.prior - 0.4).abs() < 1e-15);
        assert!((c0.log_prior - 0.4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples_for_class() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [0.0, 0.0], [1.0, 1.0], [2.0, 0.5]]).unwrap();
        let d = Dataset::new(x, vec![0, 0, 1, 1, 1], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(
            QdaModel::fit(&d),
            Err(Error::TooFewSamplesForClass { ref label, count: 2, required: 3 }) if label == "a"
        ));
    }

    #[test]
    fn duplicated_points_are_singular_unless_ridged() {
        let x = Matrix::from_rows(&[[1.0], [1.0], [1.0], [0.0], [2.0], [4.0]]).unwrap();
        let d = Dataset::new(x, vec![0, 0, 0, 1, 1, 1], vec!["flat".into(), "b".into()]).unwrap();
        assert!(matches!(QdaModel::fit(&d), Err(Error::SingularCovariance { ref label }) if label == "flat"));
        assert!(QdaModel::fit_with_ridge(&d, 1e-3).is_ok());
    }

    #[test]
    fn identical_classes_tie_to_first() {
        let m = scalar_model(1.0, 1.0);
        for z in [-3.0, 0.0, 0.7] {
            assert_eq!(m.discriminant(&[z], 0, 1).unwrap(), 0.0);
            assert_eq!(m.classify(&[z]).unwrap(), 0);
        }
    }

    #[test]
    fn scalar_discriminant_values() {
        let m = scalar_model(1.0, 4.0);
        let d0 = m.discriminant(&[0.0], 0, 1).unwrap();
        assert!((d0 - 0.5 * 4f64.ln()).abs() < 1e-15);
        let boundary = (0.5 * 4f64.ln() / 0.375).sqrt();
        assert!((boundary - 1.3596).abs() < 1e-4);
        assert!(m.discriminant(&[boundary], 0, 1).unwrap().abs() < 1e-12);
        assert!(m.discriminant(&[boundary - 1e-3], 0, 1).unwrap() > 0.0);
        assert!(m.discriminant(&[-boundary - 1e-3], 0, 1).unwrap() < 0.0);
        assert_eq!(m.classify(&[0.0]).unwrap(), 0);
        assert_eq!(m.classify(&[3.0]).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch() {
        let m = scalar_model(1.0, 4.0);
        assert!(matches!(m.class_scores(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.classify(&[]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bayes_agreement_on_grid() {
        // Independent oracle: compare π_k f_k(z) directly.
        let cases = [(0.3, -1.0, 0.5, 0.7, 2.0, 3.0), (0.5, 0.0, 1.0, 0.5, 0.0, 4.0), (0.8, 2.0, 1.5, 0.2, -1.0, 0.3)];
        for (pi0, m0, v0, pi1, m1, v1) in cases {
            let model = QdaModel::from_parameters(&[
                (pi0, vec![m0], SymmetricMatrix::from_rows(&[[v0]]).unwrap()),
                (pi1, vec![m1], SymmetricMatrix::from_rows(&[[v1]]).unwrap()),
            ])
            .unwrap();
            for i in 0..1000 {
                let z = -10.0 + 20.0 * i as f64 / 999.0;
                let w0 = pi0 * normal_density(z, m0, v0);
                let w1 = pi1 * normal_density(z, m1, v1);
                if (w0 - w1).abs() <= 1e-12 * w0.max(w1) {
                    continue;
                }
                let expected = if w0 > w1 { 0 } else { 1 };
                assert_eq!(model.classify(&[z]).unwrap(), expected, "z = {z}");
            }
        }
    }

    proptest! {
        #[test]
        fn antisymmetry(z in -20.0f64..20.0, v0 in 0.1f64..5.0, v1 in 0.1f64..5.0, m1 in -3.0f64..3.0) {
            let model = QdaModel::from_parameters(&[
                (0.4, vec![0.0], SymmetricMatrix::from_rows(&[[v0]]).unwrap()),
                (0.6, vec![m1], SymmetricMatrix::from_rows(&[[v1]]).unwrap()),
            ]).unwrap();
            let a = model.discriminant(&[z], 0, 1).unwrap();
            let b = model.discriminant(&[z], 1, 0).unwrap();
            prop_assert_eq!(a, -b);
        }

        #[test]
        fn common_prior_shift_keeps_argmax(scores in prop::collection::vec(-50.0f64..50.0, 2..6), shift in -10.0f64..10.0) {
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            // A common additive constant can only reorder exact near-ties.
            let best = argmax_first(&scores);
            let gap = scores.iter().enumerate().filter(|(k, _)| *k != best).map(|(_, s)| scores[best] - s).fold(f64::INFINITY, f64::min);
            if gap > 1e-9 {
                prop_assert_eq!(argmax_first(&shifted), best);
            }
        }

        #[test]
        fn scalar_discriminant_decreases_in_z_squared(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let m = scalar_model(1.0, 4.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let d_lo = m.discriminant(&[lo], 0, 1).unwrap();
            let d_hi = m.discriminant(&[-hi], 0, 1).unwrap();
            prop_assert!(d_hi < d_lo);
        }
    }
}
