//! Replicated experiments, leave-one-out cross-validation and the KL lower-bound diagnostic.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, column_means, dot, sample_covariance, SymmetricMatrix};
use crate::qda::argmax_first;
use crate::rng::{mix, mix_all};
use crate::rpe::{default_reduced_dim, RpeConfig, RpeModel};
use crate::schemes::{build_scheme, kl_divergence, KlSummary, SchemeId, SchemeSpec};

/// Tag mixed into the replicate seed to derive the projection master seed.
pub const PROJECTION_TAG: u64 = 0x5250;
/// Tag mixed into the data seed to derive the structure seed of a scheme.
pub const STRUCTURE_TAG: u64 = 0x5354;

/// `Σ_k π̂_k p̂_k` with `π̂_k` the proportion of class `k` in `truth` and
/// `p̂_k` its error rate; this is the overall error fraction.
pub fn misclassification(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let wrong = predictions.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// `Σ_k π_k p̂_k` from per-class error rates and priors.
pub fn weighted_misclassification(class_error: &[f64], priors: &[f64]) -> Result<f64> {
    if class_error.len() != priors.len() {
        return Err(Error::LengthMismatch {
            left: class_error.len(),
            right: priors.len(),
        });
    }
    if priors.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(class_error.iter().zip(priors).map(|(e, p)| e * p).sum())
}

/// `sqrt(r (1 - r) / n)`.
pub fn binomial_se(rate: f64, n: usize) -> f64 {
    (rate * (1.0 - rate) / n as f64).sqrt()
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// Sample standard deviation over replicates.
    SampleSd,
    /// Binomial standard error of a single proportion.
    BinomialSe,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    /// Scheme id or dataset name.
    pub identifier: String,
    pub p: usize,
    pub n_train_per_class: Option<usize>,
    pub n_test_per_class: Option<usize>,
    pub config: RpeConfig,
    /// Reduced dimension actually used.
    pub d: usize,
    pub data_seed: Option<u64>,
    pub replicates: usize,
    /// Misclassification per replicate, or the 0/1 error per LOOCV fold.
    pub per_replicate: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub dispersion: Dispersion,
    pub kl: Option<KlSummary>,
    /// Seconds per replicate; kept out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: Vec<f64>,
}

impl EvalReport {
    /// Pretty JSON without timings; equal inputs give byte-identical output.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `RPE-SN` or `RPE-STP`.
    pub fn method_label(&self) -> String {
        format!("RPE-{}", self.config.family.short_name().to_ascii_uppercase())
    }

    /// `"0.06 (0.01)"`.
    pub fn cell(&self) -> String {
        format!("{:.2} ({:.2})", self.mean, self.sd)
    }
}

/// Renders reports as a table with one row per method and one column per `p`.
/// KL rows are appended when any report carries them.
pub fn table_csv(reports: &[EvalReport]) -> String {
    let mut ps: Vec<usize> = reports.iter().map(|r| r.p).collect();
    ps.sort_unstable();
    ps.dedup();
    let mut methods: Vec<String> = Vec::new();
    for r in reports {
        let m = r.method_label();
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let mut out = String::from("method");
    for p in &ps {
        out.push_str(&format!(",p = {p}"));
    }
    out.push('\n');
    let row = |label: &str, cell: &dyn Fn(usize) -> Option<String>| {
        let mut line = label.to_string();
        for &p in &ps {
            line.push(',');
            line.push_str(&cell(p).unwrap_or_default());
        }
        line.push('\n');
        line
    };
    for m in &methods {
        out.push_str(&row(m, &|p| reports.iter().find(|r| r.p == p && &r.method_label() == m).map(EvalReport::cell)));
    }
    if reports.iter().any(|r| r.kl.is_some()) {
        let kl_at = |p: usize| reports.iter().find(|r| r.p == p).and_then(|r| r.kl);
        out.push_str(&row("KL/p", &|p| kl_at(p).map(|k| format!("{:.4}", k.kl_over_p))));
        out.push_str(&row("2KL/p", &|p| kl_at(p).map(|k| format!("{:.4}", k.two_kl_over_p))));
    }
    out
}

/// Parameters of a replicated simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeExperiment {
    pub scheme: SchemeId,
    pub p: usize,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub reps: usize,
    pub data_seed: u64,
}

impl SchemeExperiment {
    /// 100 training and 200 test points per class.
    pub fn new(scheme: SchemeId, p: usize, reps: usize, data_seed: u64) -> Self {
        SchemeExperiment {
            scheme,
            p,
            n_train_per_class: 100,
            n_test_per_class: 200,
            reps,
            data_seed,
        }
    }

    pub fn structure_seed(&self) -> u64 {
        mix(self.data_seed, STRUCTURE_TAG)
    }

    pub fn spec(&self) -> Result<SchemeSpec> {
        build_scheme(self.scheme, self.p, self.structure_seed())
    }

    /// Projection master seed of replicate `rep`.
    pub fn projection_seed(&self, rep: usize) -> u64 {
        mix_all(self.data_seed, &[rep as u64, PROJECTION_TAG])
    }
}

/// Runs `reps` independent train/test replicates. Replicate `r` draws data from
/// `mix(mix(data_seed, r), class)` and projections from `mix(mix(data_seed, r), 0x5250)`;
/// `config.master_seed` is ignored.
pub fn run_scheme_experiment(exp: &SchemeExperiment, config: &RpeConfig) -> Result<EvalReport> {
    let spec = exp.spec()?;
    run_spec_experiment(&spec, exp, config)
}

/// [`run_scheme_experiment`] on an already built spec.
pub fn run_spec_experiment(spec: &SchemeSpec, exp: &SchemeExperiment, config: &RpeConfig) -> Result<EvalReport> {
    if exp.reps == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let d = config.resolve_d(exp.n_train_per_class, spec.p);
    if d + 1 > exp.n_train_per_class {
        return Err(Error::ReducedDimTooLarge {
            d,
            n_min: exp.n_train_per_class,
        });
    }
    let mut per_replicate = Vec::with_capacity(exp.reps);
    let mut seconds = Vec::with_capacity(exp.reps);
    for rep in 0..exp.reps {
        let start = Instant::now();
        let (train, test) = spec.replicate_datasets(exp.n_train_per_class, exp.n_test_per_class, exp.data_seed, rep as u64)?;
        let model = RpeModel::fit(&train, &config.with_seed(exp.projection_seed(rep)))?;
        let predicted = model.predict(test.features())?;
        per_replicate.push(misclassification(&predicted, test.labels())?);
        seconds.push(start.elapsed().as_secs_f64());
    }
    let (mean, sd) = mean_sd(&per_replicate);
    Ok(EvalReport {
        identifier: spec.id.to_string(),
        p: spec.p,
        n_train_per_class: Some(exp.n_train_per_class),
        n_test_per_class: Some(exp.n_test_per_class),
        config: config.clone(),
        d,
        data_seed: Some(exp.data_seed),
        replicates: exp.reps,
        per_replicate,
        mean,
        sd,
        dispersion: Dispersion::SampleSd,
        kl: Some(spec.kl_per_dim()?),
        seconds,
    })
}

/// Leave-one-out cross-validation; fold `i` uses projection seed `mix(master_seed, i)`.
pub fn loocv(data: &Dataset, identifier: &str, config: &RpeConfig) -> Result<EvalReport> {
    let counts = data.class_counts();
    let n_min = counts.iter().copied().min().unwrap_or(0);
    let d = config.d.unwrap_or_else(|| default_reduced_dim(n_min.saturating_sub(1), data.p()));
    for (k, &c) in counts.iter().enumerate() {
        if c < d + 2 {
            return Err(Error::TooFewSamplesForClass {
                label: data.class_names()[k].clone(),
                count: c,
                required: d + 2,
            });
        }
    }
    let fold_config = RpeConfig { d: Some(d), ..config.clone() };
    let folds: Vec<(f64, f64)> = (0..data.n())
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let train = data.without_row(i)?;
            let model = RpeModel::fit(&train, &fold_config.with_seed(mix(config.master_seed, i as u64)))?;
            let scores = model.scores(data.features().row(i))?;
            let wrong = argmax_first(&scores) != data.labels()[i];
            Ok((f64::from(u8::from(wrong)), start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let per_replicate: Vec<f64> = folds.iter().map(|f| f.0).collect();
    let mean = per_replicate.iter().sum::<f64>() / data.n() as f64;
    Ok(EvalReport {
        identifier: identifier.to_string(),
        p: data.p(),
        n_train_per_class: None,
        n_test_per_class: None,
        config: config.clone(),
        d,
        data_seed: None,
        replicates: data.n(),
        per_replicate,
        mean,
        sd: binomial_se(mean, data.n()),
        dispersion: Dispersion::BinomialSe,
        kl: None,
        seconds: folds.iter().map(|f| f.1).collect(),
    })
}

/// `θ̂_{k,k'} = ½ (μ̂_k - μ̂_{k'})ᵀ (I + Σ̂_k)⁻¹ (μ̂_k - μ̂_{k'})`, row `k`, column `k'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ThetaMatrix {
    /// `log(θ̂ / p)`, with `None` on the diagonal and where `θ̂ = 0`.
    pub fn log_over_p(&self, p: usize) -> Vec<Vec<Option<f64>>> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| (j != k && v > 0.0).then(|| (v / p as f64).ln()))
                    .collect()
            })
            .collect()
    }
}

fn class_means(data: &Dataset) -> Vec<Vec<f64>> {
    (0..data.n_classes()).map(|k| column_means(&data.class_matrix(k))).collect()
}

fn check_theta_input(data: &Dataset) -> Result<()> {
    for (k, c) in data.class_counts().into_iter().enumerate() {
        if c < 2 {
            return Err(Error::TooFewSamplesForClass {
                label: data.class_names()[k].clone(),
                count: c,
                required: 2,
            });
        }
    }
    Ok(())
}

/// θ̂ through a rank `n_k - 1` factor `Σ̂_k = U Uᵀ` and the identity
/// `(I + U Uᵀ)⁻¹ v = v - U (I + UᵀU)⁻¹ Uᵀ v`; costs `O(p n_k²)` per class.
pub fn theta_lower_bound(data: &Dataset) -> Result<ThetaMatrix> {
    check_theta_input(data)?;
    let means = class_means(data);
    let j = data.n_classes();
    let mut values = vec![vec![0.0; j]; j];
    for k in 0..j {
        let x = data.class_matrix(k);
        let n = x.rows();
        let mu = &means[k];
        // Helmert contrasts: u_t = (Σ_{i≤t} y_i - t y_{t+1}) / sqrt(t (t+1) (n-1)), y centered.
        let mut u: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
        let mut running = vec![0.0; data.p()];
        for t in 1..n {
            for (r, (a, m)) in running.iter_mut().zip(x.row(t - 1).iter().zip(mu)) {
                *r += a - m;
            }
            let scale = 1.0 / ((t * (t + 1) * (n - 1)) as f64).sqrt();
            let tf = t as f64;
            let col = running
                .iter()
                .zip(x.row(t).iter().zip(mu))
                .map(|(r, (a, m))| scale * (r - tf * (a - m)))
                .collect();
            u.push(col);
        }
        let gram = SymmetricMatrix::from_lower_fn(n - 1, |a, b| dot(&u[a], &u[b]) + f64::from(u8::from(a == b)));
        let factor = cholesky(&gram)?;
        for other in 0..j {
            if other == k {
                continue;
            }
            let v: Vec<f64> = mu.iter().zip(&means[other]).map(|(a, b)| a - b).collect();
            let w: Vec<f64> = u.iter().map(|col| dot(col, &v)).collect();
            let theta = 0.5 * (dot(&v, &v) - factor.solve_quadratic_form(&w)?);
            values[k][other] = theta.max(0.0);
        }
    }
    Ok(ThetaMatrix {
        labels: data.class_names().to_vec(),
        values,
    })
}

/// θ̂ by factoring the dense `p × p` matrix `I + Σ̂_k`.
pub fn theta_lower_bound_dense(data: &Dataset) -> Result<ThetaMatrix> {
    check_theta_input(data)?;
    let means = class_means(data);
    let j = data.n_classes();
    let mut values = vec![vec![0.0; j]; j];
    for k in 0..j {
        let mut s = sample_covariance(&data.class_matrix(k), &means[k])?;
        s.add_to_diagonal(1.0);
        let factor = cholesky(&s)?;
        for other in 0..j {
            if other != k {
                let v: Vec<f64> = means[k].iter().zip(&means[other]).map(|(a, b)| a - b).collect();
                values[k][other] = 0.5 * factor.solve_quadratic_form(&v)?;
            }
        }
    }
    Ok(ThetaMatrix {
        labels: data.class_names().to_vec(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub p: usize,
    pub draws: usize,
    /// `KL(P_0 ‖ P_1) / p`, the limit of `D_{0,1}(Z) / p` for `Z ~ P_0`.
    pub kl_over_p: f64,
    /// Mean of `|D_{0,1}(Z)/p - KL/p|` over draws.
    pub mean_abs_deviation: f64,
    /// `mean_abs_deviation / (KL/p)`.
    pub relative_deviation: f64,
    pub d: usize,
    pub b: usize,
    /// Fraction of draws with `d⁻¹ D^{RPE}_{0,1}(Z) > 0`.
    pub positive_fraction: f64,
    pub ensemble_values: Vec<f64>,
    pub classical_values: Vec<f64>,
}

/// Draws `Z ~ P_0` and compares the population discriminants with the KL
/// divergence. `config.d` must be set; draws use `seed`, projections use
/// `config.master_seed`.
pub fn theorem_alignment_check(spec: &SchemeSpec, draws: usize, config: &RpeConfig, seed: u64) -> Result<AlignmentSummary> {
    if spec.n_classes() != 2 {
        return Err(Error::InvalidParameter("alignment check needs two classes".into()));
    }
    if draws == 0 {
        return Err(Error::EmptyInput);
    }
    let p = spec.p as f64;
    let (p0, p1) = (&spec.populations[0], &spec.populations[1]);
    let log_prior_ratio = (spec.priors[0] / spec.priors[1]).ln();
    // kl_divergence(a, b) is the divergence of P_b from P_a, so this is KL(P_0 ‖ P_1).
    let kl = kl_divergence(p1, p0)?;
    let z = spec.sample(0, draws, seed)?;
    let ensemble = RpeModel::fit_population(&spec.populations, &spec.priors, config)?;
    let d = ensemble.d();
    let ens_scores = ensemble.scores_batch(&z)?;
    let mut classical_values = Vec::with_capacity(draws);
    let mut ensemble_values = Vec::with_capacity(draws);
    for i in 0..draws {
        let row = z.row(i);
        classical_values.push(log_prior_ratio + p0.log_density_kernel(row)? - p1.log_density_kernel(row)?);
        ensemble_values.push((ens_scores.get(i, 0) - ens_scores.get(i, 1)) / d as f64);
    }
    let mean_abs_deviation = classical_values.iter().map(|v| (v / p - kl / p).abs()).sum::<f64>() / draws as f64;
    let positive = ensemble_values.iter().filter(|v| **v > 0.0).count();
    Ok(AlignmentSummary {
        p: spec.p,
        draws,
        kl_over_p: kl / p,
        mean_abs_deviation,
        relative_deviation: mean_abs_deviation / (kl / p),
        d,
        b: config.b,
        positive_fraction: positive as f64 / draws as f64,
        ensemble_values,
        classical_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::randproj::ProjectionFamily;
    use crate::rng::RandomStream;
    use crate::schemes::build_example2;
    use proptest::prelude::*;

    #[test]
    fn misclassification_examples() {
        assert_eq!(misclassification(&[0, 1, 1], &[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(misclassification(&[1, 0], &[0, 1]).unwrap(), 1.0);
        assert!((weighted_misclassification(&[0.1, 0.2], &[0.5, 0.5]).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(misclassification(&[0], &[0, 1]), Err(Error::LengthMismatch { left: 1, right: 2 }));
        assert_eq!(misclassification(&[], &[]), Err(Error::EmptyInput));
        // Per-class rates weighted by test proportions equal the pooled error fraction.
        let truth = [0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let pred = [0, 1, 0, 0, 1, 0, 0, 1, 1, 1];
        let pooled = misclassification(&pred, &truth).unwrap();
        let weighted = weighted_misclassification(&[0.25, 2.0 / 6.0], &[0.4, 0.6]).unwrap();
        assert!((pooled - weighted).abs() < 1e-15);
    }

    #[test]
    fn binomial_se_example() {
        assert!((binomial_se(0.15, 20) - 0.0798).abs() < 1e-4);
        assert!((binomial_se(0.056, 72) - 0.027).abs() < 1e-3);
    }

    #[test]
    fn mean_sd_single_value() {
        assert_eq!(mean_sd(&[0.3]), (0.3, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    fn toy_1d() -> Dataset {
        let mut rng = RandomStream::new(5);
        let a = Matrix::from_fn(10, 1, |_, _| -100.0 + rng.normal());
        let b = Matrix::from_fn(10, 1, |_, _| 100.0 + rng.normal());
        Dataset::from_class_blocks(vec![a, b], vec!["neg".into(), "pos".into()]).unwrap()
    }

    #[test]
    fn loocv_separated_toy() {
        let data = toy_1d();
        let report = loocv(&data, "toy", &RpeConfig::new(5, 1, ProjectionFamily::StandardNormal, 1)).unwrap();
        assert_eq!(report.mean, 0.0);
        assert_eq!(report.sd, 0.0);
        assert_eq!(report.per_replicate.len(), data.n());
        assert_eq!(report.replicates, 20);
    }

    #[test]
    fn loocv_rejects_small_classes() {
        let data = toy_1d();
        let cfg = RpeConfig::new(5, 9, ProjectionFamily::StandardNormal, 1);
        assert!(matches!(loocv(&data, "toy", &cfg), Err(Error::TooFewSamplesForClass { required: 11, .. })));
    }

    #[test]
    fn loocv_constant_feature_fails_loudly() {
        let mut rng = RandomStream::new(6);
        let a = Matrix::from_fn(8, 3, |_, j| if j == 0 { 1.0 } else { rng.normal() });
        let b = Matrix::from_fn(8, 3, |_, _| rng.normal());
        let data = Dataset::from_class_blocks(vec![a, b], vec!["const".into(), "b".into()]).unwrap();
        // With d = p every projection sees the zero-variance direction.
        let cfg = RpeConfig {
            max_regen_retries: 3,
            ..RpeConfig::new(2, 3, ProjectionFamily::StandardNormal, 2)
        };
        let err = loocv(&data, "const", &cfg).unwrap_err();
        assert!(matches!(err, Error::MemberDegenerate { ref label, .. } if label == "const"), "{err}");
    }

    #[test]
    fn loocv_seeds_differ_per_fold() {
        let mut rng = RandomStream::new(8);
        let a = Matrix::from_fn(6, 4, |_, _| rng.normal());
        let b = Matrix::from_fn(6, 4, |_, _| 0.5 + 2.0 * rng.normal());
        let data = Dataset::from_class_blocks(vec![a, b], vec!["a".into(), "b".into()]).unwrap();
        let cfg = RpeConfig::new(3, 2, ProjectionFamily::StandardNormal, 9);
        let r1 = loocv(&data, "x", &cfg).unwrap();
        let r2 = loocv(&data, "x", &cfg).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        assert!((r1.sd - binomial_se(r1.mean, 12)).abs() < 1e-15);
    }

    fn random_dataset(p: usize, sizes: &[usize], seed: u64, shared_mean: bool) -> Dataset {
        let mut rng = RandomStream::new(seed);
        let blocks = sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let shift: Vec<f64> = (0..p).map(|_| if shared_mean { 0.0 } else { rng.normal() }).collect();
                let scale = 0.5 + k as f64;
                Matrix::from_fn(n, p, |_, j| shift[j] + scale * rng.normal())
            })
            .collect();
        let names = (0..sizes.len()).map(|k| format!("c{k}")).collect();
        Dataset::from_class_blocks(blocks, names).unwrap()
    }

    #[test]
    fn theta_low_rank_matches_dense_small() {
        let data = random_dataset(3, &[2, 3, 4], 10, false);
        let a = theta_lower_bound(&data).unwrap();
        let b = theta_lower_bound_dense(&data).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                assert!((a.values[k][j] - b.values[k][j]).abs() <= 1e-10 * b.values[k][j].max(1.0));
            }
            assert_eq!(a.values[k][k], 0.0);
        }
    }

    #[test]
    fn theta_duplicated_points() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [0.0, 0.0], [1.0, 1.0], [2.0, -1.0]]).unwrap();
        let data = Dataset::new(x, vec![0, 0, 1, 1, 1], vec!["dup".into(), "b".into()]).unwrap();
        let t = theta_lower_bound(&data).unwrap();
        let mean_b = [1.0f64, 0.0];
        let expected = 0.5 * ((1.0 - mean_b[0]).powi(2) + (2.0 - mean_b[1]).powi(2));
        assert!((t.values[0][1] - expected).abs() < 1e-12);
        assert!(t.values[1][0] > 0.0 && t.values[1][0] < expected);
    }

    #[test]
    fn theta_identical_means_is_zero() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.0, -2.0]]).unwrap();
        let data = Dataset::new(x, vec![0, 0, 1, 1], vec!["a".into(), "b".into()]).unwrap();
        let t = theta_lower_bound(&data).unwrap();
        assert_eq!(t.values, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(t.log_over_p(2), vec![vec![None, None], vec![None, None]]);
    }

    #[test]
    fn theta_needs_two_per_class() {
        let x = Matrix::from_rows(&[[1.0], [0.0], [2.0]]).unwrap();
        let data = Dataset::new(x, vec![0, 1, 1], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(theta_lower_bound(&data), Err(Error::TooFewSamplesForClass { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn theta_low_rank_matches_dense(seed in 0u64..10_000, p in 1usize..120, n1 in 2usize..12, n2 in 2usize..12) {
            let data = random_dataset(p, &[n1, n2], seed, false);
            let a = theta_lower_bound(&data).unwrap();
            let b = theta_lower_bound_dense(&data).unwrap();
            for k in 0..2 {
                for j in 0..2 {
                    let (x, y) = (a.values[k][j], b.values[k][j]);
                    prop_assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-300), "{} vs {}", x, y);
                    prop_assert!(x >= 0.0);
                }
            }
        }
    }

    #[test]
    fn report_table_layout() {
        let cfg = RpeConfig::new(4, 2, ProjectionFamily::SparseThreePoint, 0);
        let exp = SchemeExperiment {
            n_train_per_class: 10,
            n_test_per_class: 10,
            ..SchemeExperiment::new(SchemeId::S4, 64, 1, 3)
        };
        let report = run_scheme_experiment(&exp, &cfg).unwrap();
        assert_eq!(report.sd, 0.0);
        assert_eq!(report.per_replicate.len(), 1);
        let table = table_csv(&[report.clone()]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "method,p = 64");
        assert!(lines[1].starts_with("RPE-STP,"));
        assert!(lines[2].starts_with("KL/p,"));
        assert_eq!(report.to_json(), run_scheme_experiment(&exp, &cfg).unwrap().to_json());
        assert!(!report.to_json().contains("seconds"));
    }

    #[test]
    fn experiment_rejects_large_d() {
        let cfg = RpeConfig::new(4, 10, ProjectionFamily::StandardNormal, 0);
        let exp = SchemeExperiment {
            n_train_per_class: 10,
            ..SchemeExperiment::new(SchemeId::S2, 64, 1, 3)
        };
        assert!(matches!(run_scheme_experiment(&exp, &cfg), Err(Error::ReducedDimTooLarge { .. })));
    }

    #[test]
    fn alignment_on_small_example() {
        let spec = build_example2(400, 2.0, 0, 1.0, 0).unwrap();
        let cfg = RpeConfig::new(200, 6, ProjectionFamily::StandardNormal, 4);
        let s = theorem_alignment_check(&spec, 40, &cfg, 5).unwrap();
        assert!((s.kl_over_p - 0.5 * (2f64.ln() - 0.5)).abs() < 1e-12);
        assert!(s.relative_deviation < 0.5);
        assert!(s.positive_fraction > 0.8);
    }
}
