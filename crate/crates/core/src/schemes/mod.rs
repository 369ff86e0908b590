//! Simulation schemes, Gaussian populations and exact KL divergences.
//!
//! Four two-class schemes with structured covariances are provided, plus the
//! `Σ` versus `cΣ` spiked family. All block sizes are floors of real powers of
//! `p`; values within `1e-9` of an integer are snapped first, so that e.g.
//! `⌊512^{2/3}⌋ = 64` despite `512f64.powf(2.0 / 3.0) = 63.99999999999999`.

mod covariance;

pub use covariance::{BlockKind, BlockSpec, CovBlock, StructuredCovariance};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, qr_orthogonal, Matrix};
use crate::rng::{mix, mix_all, RandomStream};

/// Seed tag for the random orthogonal factors of S4 and the spiked family.
const STRUCTURE_TAG: u64 = 0x5354_5255;

/// `⌊p^e⌋`, snapping values within `1e-9` relative of an integer.
pub fn floor_pow(p: usize, e: f64) -> usize {
    snap_floor((p as f64).powf(e))
}

pub(crate) fn snap_floor(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    S1,
    S2,
    S3,
    S4,
    Example2,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::S1 => "s1",
            SchemeId::S2 => "s2",
            SchemeId::S3 => "s3",
            SchemeId::S4 => "s4",
            SchemeId::Example2 => "example2",
        })
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" | "1" | "scheme1" => Ok(SchemeId::S1),
            "s2" | "2" | "scheme2" => Ok(SchemeId::S2),
            "s3" | "3" | "scheme3" => Ok(SchemeId::S3),
            "s4" | "4" | "scheme4" => Ok(SchemeId::S4),
            "example2" | "ex2" => Ok(SchemeId::Example2),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPopulation {
    pub mean: Vec<f64>,
    pub cov: StructuredCovariance,
}

impl GaussianPopulation {
    pub fn new(mean: Vec<f64>, cov: StructuredCovariance) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mean.len(),
            });
        }
        Ok(GaussianPopulation { mean, cov })
    }

    pub fn centered(cov: StructuredCovariance) -> Self {
        GaussianPopulation {
            mean: vec![0.0; cov.dim()],
            cov,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `n` i.i.d. rows drawn from the stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Matrix {
        let mut rng = RandomStream::new(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with(&self, rng: &mut RandomStream, n: usize) -> Matrix {
        let p = self.dim();
        let mut out = Matrix::zeros(n, p);
        for i in 0..n {
            let row = out.row_mut(i);
            self.cov.sample_into(rng, row);
            for (x, m) in row.iter_mut().zip(&self.mean) {
                *x += m;
            }
        }
        out
    }

    /// Log density without the `-(p/2) log 2π` constant.
    pub fn log_density_kernel(&self, z: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = z.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        Ok(-0.5 * self.cov.log_det() - 0.5 * self.cov.quadratic_form(&diff)?)
    }
}

/// A fully specified two-class (or more) Gaussian experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub id: SchemeId,
    pub p: usize,
    pub structure_seed: u64,
    pub populations: Vec<GaussianPopulation>,
    pub priors: Vec<f64>,
}

fn too_small(p: usize, reason: impl Into<String>) -> Error {
    Error::DimensionTooSmall { p, reason: reason.into() }
}

/// Random `t × r` matrix with orthonormal columns (positive-diagonal QR convention).
pub fn random_orthonormal(t: usize, r: usize, seed: u64) -> Result<Matrix> {
    let mut rng = RandomStream::new(seed);
    let g = Matrix::from_fn(t, r, |_, _| rng.normal());
    qr_orthogonal(&g)
}

/// Block sizes of S1 as `[(first, second, third); 2]` and the mean-shift length `l`.
pub fn scheme1_sizes(p: usize) -> Result<([[usize; 3]; 2], usize)> {
    let a = [floor_pow(p, 2.0 / 3.0), floor_pow(p, 1.0 / 3.0)];
    let b = [floor_pow(p, 0.5), floor_pow(p, 0.5)];
    let l = snap_floor((p as f64).powf(0.6) / 2.0);
    if a[0] + a[1] >= p || b[0] + b[1] >= p || 2 * l > p {
        return Err(too_small(p, "scheme 1 blocks do not fit"));
    }
    Ok(([[a[0], a[1], p - a[0] - a[1]], [b[0], b[1], p - b[0] - b[1]]], l))
}

/// `(count, size)` of the equicorrelation blocks of S2, per class.
pub fn scheme2_blocks(p: usize) -> Result<[(usize, usize); 2]> {
    let out = [(floor_pow(p, 0.4), floor_pow(p, 0.6)), (floor_pow(p, 0.3), floor_pow(p, 0.7))];
    for (count, size) in out {
        if count * size > p {
            return Err(too_small(p, "scheme 2 blocks exceed p"));
        }
    }
    Ok(out)
}

/// Spike length `l` and spectrum `Λ` of S4.
pub fn scheme4_spectrum(p: usize) -> Result<(usize, Vec<f64>)> {
    let l = floor_pow(p, 0.5);
    let top = (p as f64).powf(0.6);
    if l == 0 || 2 * l > p || top - (l as f64) + 1.0 <= 0.0 {
        return Err(too_small(p, "scheme 4 needs 2l <= p"));
    }
    Ok((l, (0..l).map(|j| top - j as f64).collect()))
}

/// Builds scheme `id` at dimension `p`. `structure_seed` only affects the
/// random orthogonal factors (S4 and the spiked family).
pub fn build_scheme(id: SchemeId, p: usize, structure_seed: u64) -> Result<SchemeSpec> {
    if p < 2 {
        return Err(too_small(p, "need p >= 2"));
    }
    let populations = match id {
        SchemeId::S1 => {
            let (sizes, l) = scheme1_sizes(p)?;
            let gamma = BlockKind::EquiCorrelation { rho: 0.5 };
            let cov = |s: [usize; 3], c: f64| {
                let t = s[2] as f64;
                StructuredCovariance::from_blocks(vec![
                    BlockSpec::new(s[0], gamma.clone()),
                    BlockSpec::new(s[1], gamma.clone()),
                    BlockSpec::new(s[2], BlockKind::ArToeplitz { rho: 0.7 }).with_scale(c * (1.5 + 1.0 / t)),
                ])
            };
            let mut mu2 = vec![0.0; p];
            mu2[p - 2 * l..p - l].fill(1.0);
            mu2[p - l..].fill(-1.0);
            vec![
                GaussianPopulation::centered(cov(sizes[0], 1.0)?),
                GaussianPopulation::new(mu2, cov(sizes[1], 1.3)?)?,
            ]
        }
        SchemeId::S2 => {
            let blocks = scheme2_blocks(p)?;
            blocks
                .iter()
                .map(|&(count, size)| {
                    let mut specs: Vec<BlockSpec> = (0..count)
                        .map(|_| BlockSpec::new(size, BlockKind::EquiCorrelation { rho: 0.9 }))
                        .collect();
                    specs.push(BlockSpec::new(p - count * size, BlockKind::Identity));
                    StructuredCovariance::from_blocks(specs).map(GaussianPopulation::centered)
                })
                .collect::<Result<Vec<_>>>()?
        }
        SchemeId::S3 => {
            let base = StructuredCovariance::from_blocks(vec![BlockSpec::new(p, BlockKind::InverseArToeplitz { rho: 0.9 })])?;
            let second = base.scaled(1.3)?;
            vec![GaussianPopulation::centered(base), GaussianPopulation::centered(second)]
        }
        SchemeId::S4 => {
            let (l, spikes) = scheme4_spectrum(p)?;
            let basis = random_orthonormal(l, l, mix(structure_seed, STRUCTURE_TAG))?;
            let spiked = BlockSpec::new(
                l,
                BlockKind::Spiked {
                    basis,
                    spikes,
                    base: 1.0,
                },
            );
            let ident = BlockSpec::new(p - l, BlockKind::Identity);
            vec![
                GaussianPopulation::centered(StructuredCovariance::from_blocks(vec![spiked.clone(), ident.clone()])?),
                GaussianPopulation::centered(StructuredCovariance::from_blocks(vec![ident, spiked])?),
            ]
        }
        SchemeId::Example2 => return build_example2(p, 2.0, 0, 1.0, structure_seed),
    };
    Ok(SchemeSpec {
        id,
        p,
        structure_seed,
        populations,
        priors: vec![0.5, 0.5],
    })
}

/// Populations `N(0, Σ)` and `N(0, cΣ)` with `Σ = I + P D Pᵀ`, `P` a random
/// `p × r` orthonormal basis and `D` uniform on `[1, spike_bound)`.
pub fn build_example2(p: usize, c: f64, r: usize, spike_bound: f64, seed: u64) -> Result<SchemeSpec> {
    if !(c > 0.0 && c.is_finite()) || c == 1.0 {
        return Err(Error::InvalidParameter(format!("scale c must be positive and not 1, got {c}")));
    }
    if p == 0 || r > p {
        return Err(too_small(p, format!("need 1 <= p and r <= p, got r = {r}")));
    }
    if r > 0 && !(spike_bound >= 1.0) {
        return Err(Error::InvalidParameter(format!("spike bound must be >= 1, got {spike_bound}")));
    }
    let cov = if r == 0 {
        StructuredCovariance::identity(p)?
    } else {
        let seed = mix(seed, STRUCTURE_TAG);
        let basis = random_orthonormal(p, r, seed)?;
        let mut rng = RandomStream::new(mix(seed, 1));
        let spikes = (0..r).map(|_| 1.0 + rng.uniform_range(1.0, spike_bound)).collect();
        StructuredCovariance::from_blocks(vec![BlockSpec::new(
            p,
            BlockKind::Spiked {
                basis,
                spikes,
                base: 1.0,
            },
        )])?
    };
    let second = cov.scaled(c)?;
    Ok(SchemeSpec {
        id: SchemeId::Example2,
        p,
        structure_seed: seed,
        populations: vec![GaussianPopulation::centered(cov), GaussianPopulation::centered(second)],
        priors: vec![0.5, 0.5],
    })
}

impl SchemeSpec {
    pub fn n_classes(&self) -> usize {
        self.populations.len()
    }

    /// `n` draws from class `class` (zero-based).
    pub fn sample(&self, class: usize, n: usize, seed: u64) -> Result<Matrix> {
        let pop = self
            .populations
            .get(class)
            .ok_or_else(|| Error::InvalidParameter(format!("class {class} out of range")))?;
        Ok(pop.sample(n, seed))
    }

    /// Train and test sets for replicate `rep`. Class `k` draws
    /// `n_train + n_test` rows from seed `mix(mix(data_seed, rep), k)`; the
    /// first `n_train` rows are for training.
    pub fn replicate_datasets(&self, n_train: usize, n_test: usize, data_seed: u64, rep: u64) -> Result<(Dataset, Dataset)> {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for k in 0..self.n_classes() {
            let all = self.sample(k, n_train + n_test, mix_all(data_seed, &[rep, k as u64]))?;
            let idx: Vec<usize> = (0..n_train).collect();
            train.push(all.select_rows(&idx));
            let idx: Vec<usize> = (n_train..n_train + n_test).collect();
            test.push(all.select_rows(&idx));
        }
        Ok((
            Dataset::from_class_blocks(train, self.class_names())?,
            Dataset::from_class_blocks(test, self.class_names())?,
        ))
    }

    pub fn class_names(&self) -> Vec<String> {
        (1..=self.n_classes()).map(|k| k.to_string()).collect()
    }

    /// `KL_{a,b}` between classes `a` and `b` via the structured path.
    pub fn kl(&self, a: usize, b: usize) -> Result<f64> {
        kl_divergence(&self.populations[a], &self.populations[b])
    }

    /// `min(KL_{1,2}, KL_{2,1}) / p` and twice that.
    pub fn kl_per_dim(&self) -> Result<KlSummary> {
        let forward = self.kl(0, 1)?;
        let backward = self.kl(1, 0)?;
        let min = forward.min(backward) / self.p as f64;
        Ok(KlSummary {
            kl_12: forward,
            kl_21: backward,
            kl_over_p: min,
            two_kl_over_p: 2.0 * min,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlSummary {
    pub kl_12: f64,
    pub kl_21: f64,
    pub kl_over_p: f64,
    pub two_kl_over_p: f64,
}

/// `KL_{a,b}` with
/// `2 KL_{a,b} = tr(Σ_a⁻¹ Σ_b) + (μ_a - μ_b)ᵀ Σ_a⁻¹ (μ_a - μ_b) - p + log det(Σ_a Σ_b⁻¹)`,
/// which is the divergence of `N(μ_b, Σ_b)` from `N(μ_a, Σ_a)`.
pub fn kl_divergence(a: &GaussianPopulation, b: &GaussianPopulation) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff: Vec<f64> = a.mean.iter().zip(&b.mean).map(|(x, y)| x - y).collect();
    let tr = StructuredCovariance::trace_inverse_product(&a.cov, &b.cov)?;
    let maha = a.cov.quadratic_form(&diff)?;
    let p = a.dim() as f64;
    Ok(0.5 * (tr + maha - p + a.cov.log_det() - b.cov.log_det()))
}

/// Largest dimension accepted by [`kl_divergence_dense`].
pub const DENSE_KL_MAX_DIM: usize = 2048;

/// [`kl_divergence`] through dense Cholesky factorizations.
pub fn kl_divergence_dense(a: &GaussianPopulation, b: &GaussianPopulation) -> Result<f64> {
    let p = a.dim();
    if p != b.dim() {
        return Err(Error::DimensionMismatch { expected: p, found: b.dim() });
    }
    if p > DENSE_KL_MAX_DIM {
        return Err(Error::InvalidParameter(format!("dense KL limited to p <= {DENSE_KL_MAX_DIM}")));
    }
    let fa = cholesky(&a.cov.to_dense())?;
    let fb = cholesky(&b.cov.to_dense())?;
    // tr(Σ_a⁻¹ Σ_b) = ‖L_a⁻¹ L_b‖_F².
    let lb = fb.lower_dense();
    let mut tr = 0.0;
    for j in 0..p {
        let col = lb.column(j);
        let y = fa.forward_solve(&col)?;
        tr += dot(&y, &y);
    }
    let diff: Vec<f64> = a.mean.iter().zip(&b.mean).map(|(x, y)| x - y).collect();
    let maha = fa.solve_quadratic_form(&diff)?;
    Ok(0.5 * (tr + maha - p as f64 + fa.log_det() - fb.log_det()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricMatrix;

    fn scalar(mean: f64, var: f64) -> GaussianPopulation {
        let cov = StructuredCovariance::identity(1).unwrap().scaled(var).unwrap();
        GaussianPopulation::new(vec![mean], cov).unwrap()
    }

    #[test]
    fn scheme1_sizes_at_512() {
        let (sizes, l) = scheme1_sizes(512).unwrap();
        assert_eq!(sizes[0], [64, 8, 440]);
        assert_eq!(sizes[1], [22, 22, 468]);
        assert_eq!(l, 21);
        let spec = build_scheme(SchemeId::S1, 512, 0).unwrap();
        let mu2 = &spec.populations[1].mean;
        assert_eq!(mu2[512 - 43], 0.0);
        assert_eq!(mu2[512 - 42], 1.0);
        assert_eq!(mu2[511], -1.0);
        assert_eq!(mu2.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn scheme2_blocks_at_512() {
        assert_eq!(scheme2_blocks(512).unwrap(), [(12, 42), (6, 78)]);
        let spec = build_scheme(SchemeId::S2, 512, 0).unwrap();
        assert_eq!(spec.populations[0].cov.blocks().len(), 13);
        assert_eq!(spec.populations[1].cov.blocks().len(), 7);
    }

    #[test]
    fn scheme4_spectrum_at_512() {
        let (l, spikes) = scheme4_spectrum(512).unwrap();
        assert_eq!(l, 22);
        assert!((spikes[0] - 42.22).abs() < 0.01);
        assert!((spikes[21] - (spikes[0] - 21.0)).abs() < 1e-12);
    }

    #[test]
    fn floors_snap_exact_powers() {
        assert_eq!(floor_pow(512, 2.0 / 3.0), 64);
        assert_eq!(floor_pow(512, 1.0 / 3.0), 8);
        assert_eq!(floor_pow(4096, 0.5), 64);
        assert_eq!(floor_pow(1000, 1.0 / 3.0), 10);
        assert_eq!(floor_pow(2048, 0.5), 45);
    }

    #[test]
    fn too_small_dimensions() {
        assert!(matches!(build_scheme(SchemeId::S4, 1, 0), Err(Error::DimensionTooSmall { .. })));
        assert!(matches!(build_scheme(SchemeId::S1, 1, 0), Err(Error::DimensionTooSmall { .. })));
        assert!(build_scheme(SchemeId::S1, 3, 0).is_err());
    }

    #[test]
    fn scalar_kl_values() {
        let a = scalar(0.0, 1.0);
        let b = scalar(0.0, 4.0);
        let ab = kl_divergence(&a, &b).unwrap();
        let ba = kl_divergence(&b, &a).unwrap();
        assert!((ab - (4.0 - 1.0 + 0.25f64.ln()) / 2.0).abs() < 1e-14);
        assert!((ab - 0.8069).abs() < 1e-4);
        assert!((ba - 0.3181).abs() < 1e-4);
        assert_eq!(kl_divergence(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn example2_kl() {
        let spec = build_example2(100, 2.0, 0, 1.0, 1).unwrap();
        let kl = spec.kl(0, 1).unwrap();
        assert!((kl - 100.0 * (2.0 - 2f64.ln() - 1.0) / 2.0).abs() < 1e-10);
        assert!((kl - 15.34).abs() < 0.01);
        for r in [1, 5] {
            let spec = build_example2(60, 1.7, r, 8.0, 3).unwrap();
            let expected = 60.0 * (1.7 - 1.7f64.ln() - 1.0) / 2.0;
            assert!((spec.kl(0, 1).unwrap() - expected).abs() < 1e-9);
        }
        assert!(build_example2(10, 1.0, 0, 1.0, 0).is_err());
        assert!(build_example2(10, 2.0, 11, 2.0, 0).is_err());
    }

    #[test]
    fn example2_spiked_covariance_is_orthonormal_plus_identity() {
        let spec = build_example2(30, 2.0, 4, 5.0, 9).unwrap();
        let BlockKind::Spiked { basis, spikes, .. } = &spec.populations[0].cov.blocks()[0].kind else {
            panic!("expected spiked block");
        };
        let gram = basis.transpose().matmul(basis).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((gram.get(i, j) - f64::from(u8::from(i == j))).abs() < 1e-10);
            }
            assert!((2.0..6.0).contains(&spikes[i]));
        }
    }

    #[test]
    fn scheme4_closed_form() {
        let p = 128;
        let spec = build_scheme(SchemeId::S4, p, 17).unwrap();
        let (l, spikes) = scheme4_spectrum(p).unwrap();
        let closed = 0.5 * (spikes.iter().sum::<f64>() + spikes.iter().map(|x| 1.0 / x).sum::<f64>() - 2.0 * l as f64);
        let dense = kl_divergence_dense(&spec.populations[0], &spec.populations[1]).unwrap();
        assert!((dense - closed).abs() < 1e-8 * closed);
        assert!((spec.kl(0, 1).unwrap() - closed).abs() < 1e-8 * closed);
        assert!((spec.kl(1, 0).unwrap() - closed).abs() < 1e-8 * closed);
    }

    #[test]
    fn structured_kl_matches_dense() {
        for id in [SchemeId::S1, SchemeId::S2, SchemeId::S3, SchemeId::S4] {
            for p in [64, 200, 512] {
                let spec = build_scheme(id, p, 5).unwrap();
                for (a, b) in [(0, 1), (1, 0)] {
                    let s = spec.kl(a, b).unwrap();
                    let d = kl_divergence_dense(&spec.populations[a], &spec.populations[b]).unwrap();
                    assert!((s - d).abs() <= 1e-6 * d.abs(), "{id} p={p}: {s} vs {d}");
                    assert!(s >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn kl_table_rows_at_512() {
        let s3 = build_scheme(SchemeId::S3, 512, 0).unwrap().kl_per_dim().unwrap();
        assert!((s3.kl_over_p - 0.0158).abs() < 5e-4, "{s3:?}");
        let s4 = build_scheme(SchemeId::S4, 512, 0).unwrap().kl_per_dim().unwrap();
        assert!((s4.kl_over_p - 0.639).abs() < 5e-3, "{s4:?}");
    }

    #[test]
    fn dense_materializations_pass_cholesky() {
        for id in [SchemeId::S1, SchemeId::S2, SchemeId::S3, SchemeId::S4] {
            let spec = build_scheme(id, 256, 2).unwrap();
            for pop in &spec.populations {
                let d: SymmetricMatrix = pop.cov.to_dense();
                assert!(cholesky(&d).is_ok(), "{id}");
            }
        }
    }

    fn check_law(spec: &SchemeSpec, n: usize, seed: u64) {
        for (k, pop) in spec.populations.iter().enumerate() {
            let x = spec.sample(k, n, seed + k as u64).unwrap();
            let mean = crate::linalg::column_means(&x);
            let cov = crate::linalg::sample_covariance(&x, &mean).unwrap();
            let dense = pop.cov.to_dense();
            for i in 0..spec.p {
                let sd = dense.get(i, i).sqrt();
                assert!((mean[i] - pop.mean[i]).abs() < 0.05 * sd.max(1.0), "{} mean {i}", spec.id);
                for j in 0..=i {
                    let tol = 0.05 * (dense.get(i, i) * dense.get(j, j)).sqrt().max(1.0);
                    assert!((cov.get(i, j) - dense.get(i, j)).abs() < tol, "{} cov ({i},{j})", spec.id);
                }
            }
        }
    }

    #[test]
    fn sampler_laws_at_small_p() {
        check_law(&build_scheme(SchemeId::S1, 64, 0).unwrap(), 200_000, 100);
        check_law(&build_scheme(SchemeId::S2, 64, 0).unwrap(), 200_000, 200);
        check_law(&build_scheme(SchemeId::S4, 64, 0).unwrap(), 200_000, 400);
    }

    #[test]
    fn scheme3_sample_precision() {
        let spec = build_scheme(SchemeId::S3, 50, 0).unwrap();
        let x = spec.sample(0, 100_000, 77).unwrap();
        let mean = crate::linalg::column_means(&x);
        let cov = crate::linalg::sample_covariance(&x, &mean).unwrap();
        let f = cholesky(&cov).unwrap();
        for j in 0..50 {
            let mut e = vec![0.0; 50];
            e[j] = 1.0;
            let col = f.solve(&e).unwrap();
            for i in 0..50usize {
                let expected = 0.9f64.powi(i.abs_diff(j) as i32);
                assert!((col[i] - expected).abs() < 0.05, "({i},{j}): {} vs {expected}", col[i]);
            }
        }
    }

    #[test]
    fn replicate_datasets_are_deterministic() {
        let spec = build_scheme(SchemeId::S2, 64, 0).unwrap();
        let (a, b) = spec.replicate_datasets(10, 5, 42, 3).unwrap();
        let (c, d) = spec.replicate_datasets(10, 5, 42, 3).unwrap();
        assert_eq!(a, c);
        assert_eq!(b, d);
        assert_eq!(a.class_counts(), vec![10, 10]);
        let (e, _) = spec.replicate_datasets(10, 5, 42, 4).unwrap();
        assert_ne!(a.features(), e.features());
    }
}
