//! The random projection ensemble of QDA models.
//!
//! Member `b` (zero-based) draws its matrix from seed `mix(master_seed, b + 1)`.
//! If the projected covariance of some class is singular, the member is redrawn
//! from `mix(seed_b, t)` for `t = 1, 2, …` up to `max_regen_retries` times; the
//! seed actually used is stored with the member so it can be regenerated.
//!
//! Ensemble scores are `ḡ_k(z) = B⁻¹ Σ_b g_k^b(R_b z)`, summed in member order
//! whether or not members are evaluated in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SymmetricMatrix};
use crate::qda::{argmax_first, fit_class_blocks, QdaModel};
use crate::randproj::{generate, ProjectionFamily, ProjectionMatrix};
use crate::rng::mix;
use crate::schemes::GaussianPopulation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpeConfig {
    /// Ensemble size `B`.
    pub b: usize,
    /// Reduced dimension; `None` picks [`default_reduced_dim`].
    pub d: Option<usize>,
    pub family: ProjectionFamily,
    pub master_seed: u64,
    pub ridge: f64,
    pub max_regen_retries: usize,
}

impl Default for RpeConfig {
    fn default() -> Self {
        RpeConfig {
            b: 200,
            d: None,
            family: ProjectionFamily::StandardNormal,
            master_seed: 0,
            ridge: 0.0,
            max_regen_retries: 100,
        }
    }
}

impl RpeConfig {
    pub fn new(b: usize, d: usize, family: ProjectionFamily, master_seed: u64) -> Self {
        RpeConfig {
            b,
            d: Some(d),
            family,
            master_seed,
            ..RpeConfig::default()
        }
    }

    pub fn with_seed(&self, master_seed: u64) -> Self {
        RpeConfig {
            master_seed,
            ..self.clone()
        }
    }

    /// The reduced dimension used for training data with smallest class size `n_min`.
    pub fn resolve_d(&self, n_min: usize, p: usize) -> usize {
        self.d.unwrap_or_else(|| default_reduced_dim(n_min, p))
    }

    fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::InvalidParameter("ensemble size B must be >= 1".into()));
        }
        if self.d == Some(0) {
            return Err(Error::InvalidParameter("reduced dimension d must be >= 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::InvalidParameter(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// `min(n_min - 1, ⌈ln p⌉, 10)`, and at least 1.
pub fn default_reduced_dim(n_min: usize, p: usize) -> usize {
    let log_p = (p.max(1) as f64).ln().ceil() as usize;
    n_min.saturating_sub(1).min(log_p).clamp(1, 10)
}

/// Seed of the first draw for member `index`.
pub fn member_seed(master_seed: u64, index: usize) -> u64 {
    mix(master_seed, index as u64 + 1)
}

/// Seed of retry `t ≥ 1` for a member whose first seed is `first`.
pub fn retry_seed(first: u64, t: usize) -> u64 {
    mix(first, t as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMember {
    pub projection: ProjectionMatrix,
    pub model: QdaModel,
    /// Number of redraws before this matrix was accepted.
    pub retries: usize,
}

impl ProjectionMember {
    pub fn new(projection: ProjectionMatrix, model: QdaModel, retries: usize) -> Result<Self> {
        if model.dim() != projection.d() {
            return Err(Error::DimensionMismatch {
                expected: projection.d(),
                found: model.dim(),
            });
        }
        Ok(ProjectionMember {
            projection,
            model,
            retries,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpeModel {
    config: RpeConfig,
    d: usize,
    p: usize,
    class_names: Vec<String>,
    members: Vec<ProjectionMember>,
}

/// Redraws until `build` succeeds or reports something other than a singular covariance.
fn draw_member<F>(config: &RpeConfig, d: usize, p: usize, index: usize, build: F) -> Result<ProjectionMember>
where
    F: Fn(&ProjectionMatrix) -> Result<QdaModel>,
{
    let first = member_seed(config.master_seed, index);
    let mut singular = String::new();
    for t in 0..=config.max_regen_retries {
        let seed = if t == 0 { first } else { retry_seed(first, t) };
        let r = generate(config.family, d, p, seed)?;
        match build(&r) {
            Ok(model) => return ProjectionMember::new(r, model, t),
            Err(Error::SingularCovariance { label }) => singular = label,
            Err(e) => return Err(e),
        }
    }
    Err(Error::MemberDegenerate {
        member: index,
        retries: config.max_regen_retries,
        label: singular,
    })
}

impl RpeModel {
    /// Fits one projected QDA model per member on the training data.
    pub fn fit(data: &Dataset, config: &RpeConfig) -> Result<Self> {
        config.validate()?;
        if data.n_classes() < 2 {
            return Err(Error::InvalidParameter("need at least two classes".into()));
        }
        let n_min = data.class_counts().into_iter().min().unwrap_or(0);
        let p = data.p();
        let d = config.resolve_d(n_min, p);
        if d >= n_min {
            return Err(Error::ReducedDimTooLarge { d, n_min });
        }
        if d > p {
            return Err(Error::InvalidDimensions { d, p });
        }
        let x = data.features();
        let build = |r: &ProjectionMatrix| {
            let projected = r.project(x)?;
            let blocks: Vec<Matrix> = (0..data.n_classes())
                .map(|k| projected.select_rows(data.class_rows(k)))
                .collect();
            fit_class_blocks(&blocks, data.class_names(), config.ridge)
        };
        let members = (0..config.b)
            .into_par_iter()
            .map(|b| draw_member(config, d, p, b, build))
            .collect::<Result<Vec<_>>>()?;
        Ok(RpeModel {
            config: config.clone(),
            d,
            p,
            class_names: data.class_names().to_vec(),
            members,
        })
    }

    /// Builds members from known populations, using `R μ_k` and `R Σ_k Rᵀ`.
    /// `config.d` must be set.
    pub fn fit_population(pops: &[GaussianPopulation], priors: &[f64], config: &RpeConfig) -> Result<Self> {
        config.validate()?;
        if pops.len() < 2 || pops.len() != priors.len() {
            return Err(Error::InvalidParameter("need matching populations and priors, at least two".into()));
        }
        let p = pops[0].dim();
        if let Some(bad) = pops.iter().find(|q| q.dim() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: bad.dim(),
            });
        }
        let d = config
            .d
            .ok_or_else(|| Error::InvalidParameter("population mode needs an explicit d".into()))?;
        let build = |r: &ProjectionMatrix| {
            let rows: Vec<Vec<f64>> = (0..d).map(|i| r.row_dense(i)).collect();
            let params = pops
                .iter()
                .zip(priors)
                .map(|(pop, &prior)| {
                    let mean = r.project_vec(&pop.mean)?;
                    let sigma_rows = rows.iter().map(|row| pop.cov.matvec(row)).collect::<Result<Vec<_>>>()?;
                    let cov = SymmetricMatrix::from_lower_fn(d, |i, j| dot(&rows[j], &sigma_rows[i]));
                    Ok((prior, mean, cov))
                })
                .collect::<Result<Vec<_>>>()?;
            QdaModel::from_parameters(&params)
        };
        let members = (0..config.b)
            .into_par_iter()
            .map(|b| draw_member(config, d, p, b, build))
            .collect::<Result<Vec<_>>>()?;
        Ok(RpeModel {
            config: config.clone(),
            d,
            p,
            class_names: (1..=pops.len()).map(|k| k.to_string()).collect(),
            members,
        })
    }

    /// Reassembles a model from stored members.
    pub fn from_parts(config: RpeConfig, class_names: Vec<String>, members: Vec<ProjectionMember>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("ensemble has no members".into()))?;
        let (d, p) = (first.projection.d(), first.projection.p());
        let priors = first.model.priors();
        for (b, m) in members.iter().enumerate() {
            if m.projection.d() != d || m.projection.p() != p {
                return Err(Error::ModelFormat(format!("member {b} has shape {}x{}", m.projection.d(), m.projection.p())));
            }
            if m.model.n_classes() != class_names.len() || m.model.priors() != priors {
                return Err(Error::ModelFormat(format!("member {b} disagrees on classes or priors")));
            }
        }
        Ok(RpeModel {
            config,
            d,
            p,
            class_names,
            members,
        })
    }

    pub fn config(&self) -> &RpeConfig {
        &self.config
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn members(&self) -> &[ProjectionMember] {
        &self.members
    }

    pub fn priors(&self) -> Vec<f64> {
        self.members[0].model.priors()
    }

    /// Averaged per-class scores `ḡ_k(z)`.
    pub fn scores(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z.len())?;
        let j = self.n_classes();
        let mut total = vec![0.0; j];
        let mut member = vec![0.0; j];
        let mut projected = vec![0.0; self.d];
        let mut scratch = Vec::with_capacity(self.d);
        for m in &self.members {
            m.projection.project_into(z, &mut projected);
            m.model.scores_into(&projected, &mut member, &mut scratch);
            for (t, s) in total.iter_mut().zip(&member) {
                *t += s;
            }
        }
        let b = self.members.len() as f64;
        Ok(total.into_iter().map(|t| t / b).collect())
    }

    /// `D^{RPE}_{a,b}(z) = ḡ_a(z) - ḡ_b(z)`.
    pub fn discriminant(&self, z: &[f64], a: usize, b: usize) -> Result<f64> {
        let s = self.scores(z)?;
        Ok(s[a] - s[b])
    }

    pub fn classify(&self, z: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.scores(z)?))
    }

    /// Scores for every row of `x` (`n × J`), bit-identical to [`RpeModel::scores`] row by row.
    pub fn scores_batch(&self, x: &Matrix) -> Result<Matrix> {
        self.check(x.cols())?;
        let j = self.n_classes();
        let n = x.rows();
        let per_member: Vec<Vec<f64>> = self
            .members
            .par_iter()
            .map(|m| {
                let mut out = vec![0.0; n * j];
                let mut projected = vec![0.0; self.d];
                let mut scratch = Vec::with_capacity(self.d);
                for i in 0..n {
                    m.projection.project_into(x.row(i), &mut projected);
                    m.model.scores_into(&projected, &mut out[i * j..(i + 1) * j], &mut scratch);
                }
                out
            })
            .collect();
        let mut total = vec![0.0; n * j];
        for s in &per_member {
            for (t, v) in total.iter_mut().zip(s) {
                *t += v;
            }
        }
        let b = self.members.len() as f64;
        for t in &mut total {
            *t /= b;
        }
        Matrix::from_vec(n, j, total)
    }

    /// Class index for every row of `x`.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let s = self.scores_batch(x)?;
        Ok((0..s.rows()).map(|i| argmax_first(s.row(i))).collect())
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: len,
            });
        }
        Ok(())
    }
}
