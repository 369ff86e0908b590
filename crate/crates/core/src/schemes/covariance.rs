//! Block-diagonal covariance matrices with closed-form inverses and determinants.
//!
//! A [`StructuredCovariance`] is `Diag(s_1 Γ_1, …, s_m Γ_m)` where each `Γ_j`
//! is one of a few parametric kinds. Every kind supports `O(t)` or `O(t r)`
//! products, solves and sampling, so nothing of size `p × p` is formed unless
//! [`StructuredCovariance::to_dense`] is asked for.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SymmetricMatrix};
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BlockKind {
    Identity,
    /// `(1 - ρ) I + ρ 1 1ᵀ`.
    EquiCorrelation { rho: f64 },
    /// `(ρ^{|i-j|})`.
    ArToeplitz { rho: f64 },
    /// The inverse of `(ρ^{|i-j|})`, a tridiagonal matrix.
    InverseArToeplitz { rho: f64 },
    /// `base (I - P Pᵀ) + P diag(λ) Pᵀ` for `P` with orthonormal columns.
    Spiked { basis: Matrix, spikes: Vec<f64>, base: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovBlock {
    pub offset: usize,
    pub size: usize,
    pub scale: f64,
    pub kind: BlockKind,
}

/// Entries of a block that can be nonzero lie within this distance of the diagonal.
fn bandwidth_of(kind: &BlockKind, inverse: bool) -> Option<usize> {
    match (kind, inverse) {
        (BlockKind::Identity, _) => Some(0),
        (BlockKind::ArToeplitz { .. }, true) | (BlockKind::InverseArToeplitz { .. }, false) => Some(1),
        _ => None,
    }
}

impl CovBlock {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.size == 0 {
            return bad("covariance block of size 0".into());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad(format!("block scale must be positive, got {}", self.scale));
        }
        match &self.kind {
            BlockKind::Identity => {}
            BlockKind::EquiCorrelation { rho } => {
                let lo = -1.0 / (self.size as f64 - 1.0).max(1.0);
                if !(*rho > lo && *rho < 1.0) {
                    return bad(format!("equicorrelation rho {rho} not positive definite at size {}", self.size));
                }
            }
            BlockKind::ArToeplitz { rho } | BlockKind::InverseArToeplitz { rho } => {
                if !(rho.abs() < 1.0) {
                    return bad(format!("Toeplitz rho {rho} outside (-1, 1)"));
                }
            }
            BlockKind::Spiked { basis, spikes, base } => {
                if basis.rows() != self.size || basis.cols() != spikes.len() || spikes.len() > self.size {
                    return bad("spiked block basis has the wrong shape".into());
                }
                if !(*base > 0.0) || spikes.iter().any(|&l| !(l > 0.0)) {
                    return bad("spiked block eigenvalues must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// `Γ_{ij}` without the scale, for block-local indices.
    fn unit_entry(&self, i: usize, j: usize) -> f64 {
        match &self.kind {
            BlockKind::Identity => f64::from(u8::from(i == j)),
            BlockKind::EquiCorrelation { rho } => {
                if i == j {
                    1.0
                } else {
                    *rho
                }
            }
            BlockKind::ArToeplitz { rho } => rho.powi(i.abs_diff(j) as i32),
            BlockKind::InverseArToeplitz { rho } => tridiagonal_entry(*rho, self.size, i, j),
            BlockKind::Spiked { basis, spikes, base } => spiked_entry(basis, spikes, *base, i, j, false),
        }
    }

    /// `(Γ⁻¹)_{ij}` without the scale.
    fn unit_inverse_entry(&self, i: usize, j: usize) -> f64 {
        match &self.kind {
            BlockKind::Identity => f64::from(u8::from(i == j)),
            BlockKind::EquiCorrelation { rho } => {
                let t = self.size as f64;
                let delta = f64::from(u8::from(i == j));
                (delta - rho / (1.0 - rho + t * rho)) / (1.0 - rho)
            }
            BlockKind::ArToeplitz { rho } => tridiagonal_entry(*rho, self.size, i, j),
            BlockKind::InverseArToeplitz { rho } => rho.powi(i.abs_diff(j) as i32),
            BlockKind::Spiked { basis, spikes, base } => spiked_entry(basis, spikes, *base, i, j, true),
        }
    }

    fn unit_log_det(&self) -> f64 {
        let t = self.size as f64;
        match &self.kind {
            BlockKind::Identity => 0.0,
            BlockKind::EquiCorrelation { rho } => (t - 1.0) * (1.0 - rho).ln() + (1.0 - rho + t * rho).ln(),
            BlockKind::ArToeplitz { rho } => (t - 1.0) * (1.0 - rho * rho).ln(),
            BlockKind::InverseArToeplitz { rho } => -(t - 1.0) * (1.0 - rho * rho).ln(),
            BlockKind::Spiked { spikes, base, .. } => {
                spikes.iter().map(|l| l.ln()).sum::<f64>() + (t - spikes.len() as f64) * base.ln()
            }
        }
    }

    fn unit_trace(&self) -> f64 {
        let t = self.size as f64;
        match &self.kind {
            BlockKind::Identity | BlockKind::EquiCorrelation { .. } | BlockKind::ArToeplitz { .. } => t,
            BlockKind::InverseArToeplitz { rho } => {
                if self.size == 1 {
                    1.0
                } else {
                    (2.0 + (t - 2.0) * (1.0 + rho * rho)) / (1.0 - rho * rho)
                }
            }
            BlockKind::Spiked { spikes, base, .. } => spikes.iter().sum::<f64>() + (t - spikes.len() as f64) * base,
        }
    }

    /// `out = Γ v` (unit scale).
    fn unit_matvec(&self, v: &[f64], out: &mut [f64]) {
        match &self.kind {
            BlockKind::Identity => out.copy_from_slice(v),
            BlockKind::EquiCorrelation { rho } => {
                let s: f64 = v.iter().sum();
                for (o, x) in out.iter_mut().zip(v) {
                    *o = (1.0 - rho) * x + rho * s;
                }
            }
            BlockKind::ArToeplitz { rho } => toeplitz_matvec(*rho, v, out),
            BlockKind::InverseArToeplitz { rho } => tridiagonal_matvec(*rho, v, out),
            BlockKind::Spiked { basis, spikes, base } => spiked_apply(basis, spikes, *base, v, out, false),
        }
    }

    /// `out = Γ⁻¹ v` (unit scale).
    fn unit_solve(&self, v: &[f64], out: &mut [f64]) {
        match &self.kind {
            BlockKind::Identity => out.copy_from_slice(v),
            BlockKind::EquiCorrelation { rho } => {
                let t = self.size as f64;
                let s: f64 = v.iter().sum();
                let c = rho / (1.0 - rho + t * rho);
                for (o, x) in out.iter_mut().zip(v) {
                    *o = (x - c * s) / (1.0 - rho);
                }
            }
            BlockKind::ArToeplitz { rho } => tridiagonal_matvec(*rho, v, out),
            BlockKind::InverseArToeplitz { rho } => toeplitz_matvec(*rho, v, out),
            BlockKind::Spiked { basis, spikes, base } => spiked_apply(basis, spikes, *base, v, out, true),
        }
    }

    /// Fills `out` with a draw from `N(0, Γ)` (unit scale).
    fn unit_sample(&self, rng: &mut RandomStream, out: &mut [f64]) {
        let t = self.size;
        match &self.kind {
            BlockKind::Identity => rng.fill_normal(out),
            BlockKind::EquiCorrelation { rho } => {
                rng.fill_normal(out);
                let w = rng.normal() * rho.sqrt();
                let a = (1.0 - rho).sqrt();
                for o in out.iter_mut() {
                    *o = a * *o + w;
                }
            }
            BlockKind::ArToeplitz { rho } => {
                rng.fill_normal(out);
                let s = (1.0 - rho * rho).sqrt();
                for i in 1..t {
                    out[i] = rho * out[i - 1] + s * out[i];
                }
            }
            BlockKind::InverseArToeplitz { rho } => {
                // x = L⁻ᵀ z where L is the lower Cholesky factor of the AR Toeplitz matrix.
                rng.fill_normal(out);
                let s = (1.0 - rho * rho).sqrt();
                for i in 0..t {
                    let diag = if i == 0 { 1.0 } else { 1.0 / s };
                    let next = if i + 1 < t { out[i + 1] } else { 0.0 };
                    out[i] = diag * out[i] - rho / s * next;
                }
            }
            BlockKind::Spiked { basis, spikes, base } => {
                let r = spikes.len();
                let mut w = vec![0.0; r];
                if r < t {
                    rng.fill_normal(out);
                    let proj = project_onto_columns(basis, out);
                    let sb = base.sqrt();
                    for (i, o) in out.iter_mut().enumerate() {
                        *o = sb * (*o - dot(basis.row(i), &proj));
                    }
                } else {
                    out.fill(0.0);
                }
                rng.fill_normal(&mut w);
                for (wk, l) in w.iter_mut().zip(spikes) {
                    *wk *= l.sqrt();
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o += dot(basis.row(i), &w);
                }
            }
        }
    }
}

/// Entry of the inverse of `(ρ^{|i-j|})` of size `t`.
fn tridiagonal_entry(rho: f64, t: usize, i: usize, j: usize) -> f64 {
    if t == 1 {
        return 1.0;
    }
    let denom = 1.0 - rho * rho;
    if i == j {
        if i == 0 || i == t - 1 {
            1.0 / denom
        } else {
            (1.0 + rho * rho) / denom
        }
    } else if i.abs_diff(j) == 1 {
        -rho / denom
    } else {
        0.0
    }
}

fn tridiagonal_matvec(rho: f64, v: &[f64], out: &mut [f64]) {
    let t = v.len();
    if t == 1 {
        out[0] = v[0];
        return;
    }
    let denom = 1.0 - rho * rho;
    for i in 0..t {
        let diag = if i == 0 || i == t - 1 { 1.0 } else { 1.0 + rho * rho };
        let mut acc = diag * v[i];
        if i > 0 {
            acc -= rho * v[i - 1];
        }
        if i + 1 < t {
            acc -= rho * v[i + 1];
        }
        out[i] = acc / denom;
    }
}

/// `out = (ρ^{|i-j|}) v` in `O(t)` with one forward and one backward sweep.
fn toeplitz_matvec(rho: f64, v: &[f64], out: &mut [f64]) {
    let t = v.len();
    let mut acc = 0.0;
    for i in 0..t {
        acc = v[i] + rho * acc;
        out[i] = acc;
    }
    acc = 0.0;
    for i in (0..t).rev() {
        // The backward sum also counts v[i], already included in the forward sweep.
        out[i] += rho * acc;
        acc = v[i] + rho * acc;
    }
}

/// `Pᵀ v` for `P` stored row-major as `t × r`.
fn project_onto_columns(basis: &Matrix, v: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; basis.cols()];
    for (i, &x) in v.iter().enumerate() {
        for (wk, &pk) in w.iter_mut().zip(basis.row(i)) {
            *wk += pk * x;
        }
    }
    w
}

fn spiked_apply(basis: &Matrix, spikes: &[f64], base: f64, v: &[f64], out: &mut [f64], inverse: bool) {
    let w = project_onto_columns(basis, v);
    let (b, lam): (f64, Vec<f64>) = if inverse {
        (1.0 / base, spikes.iter().map(|l| 1.0 / l).collect())
    } else {
        (base, spikes.to_vec())
    };
    let scaled: Vec<f64> = w.iter().zip(&lam).map(|(a, l)| a * l).collect();
    for (i, o) in out.iter_mut().enumerate() {
        let row = basis.row(i);
        *o = b * (v[i] - dot(row, &w)) + dot(row, &scaled);
    }
}

fn spiked_entry(basis: &Matrix, spikes: &[f64], base: f64, i: usize, j: usize, inverse: bool) -> f64 {
    let (ri, rj) = (basis.row(i), basis.row(j));
    let mut proj = 0.0;
    let mut spiked = 0.0;
    for k in 0..spikes.len() {
        let pp = ri[k] * rj[k];
        proj += pp;
        spiked += pp * if inverse { 1.0 / spikes[k] } else { spikes[k] };
    }
    let b = if inverse { 1.0 / base } else { base };
    b * (f64::from(u8::from(i == j)) - proj) + spiked
}

/// A symmetric positive-definite block-diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredCovariance {
    dim: usize,
    blocks: Vec<CovBlock>,
}

/// One block of a [`StructuredCovariance`], before offsets are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub size: usize,
    pub scale: f64,
    pub kind: BlockKind,
}

impl BlockSpec {
    pub fn new(size: usize, kind: BlockKind) -> Self {
        BlockSpec { size, scale: 1.0, kind }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

impl StructuredCovariance {
    /// Lays the blocks out along the diagonal in order.
    pub fn from_blocks(specs: Vec<BlockSpec>) -> Result<Self> {
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(specs.len());
        for s in specs {
            if s.size == 0 {
                continue;
            }
            let b = CovBlock {
                offset,
                size: s.size,
                scale: s.scale,
                kind: s.kind,
            };
            b.validate()?;
            offset += b.size;
            blocks.push(b);
        }
        if offset == 0 {
            return Err(Error::InvalidParameter("covariance has dimension 0".into()));
        }
        Ok(StructuredCovariance { dim: offset, blocks })
    }

    pub fn identity(p: usize) -> Result<Self> {
        StructuredCovariance::from_blocks(vec![BlockSpec::new(p, BlockKind::Identity)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[CovBlock] {
        &self.blocks
    }

    /// `c Σ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        let mut out = self.clone();
        for b in &mut out.blocks {
            b.scale *= c;
        }
        Ok(out)
    }

    fn block_of(&self, i: usize) -> &CovBlock {
        let k = self.blocks.partition_point(|b| b.offset + b.size <= i);
        &self.blocks[k]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let b = self.block_of(i);
        if j < b.offset || j >= b.offset + b.size {
            return 0.0;
        }
        b.scale * b.unit_entry(i - b.offset, j - b.offset)
    }

    /// `(Σ⁻¹)_{ij}`.
    pub fn inverse_entry(&self, i: usize, j: usize) -> f64 {
        let b = self.block_of(i);
        if j < b.offset || j >= b.offset + b.size {
            return 0.0;
        }
        b.unit_inverse_entry(i - b.offset, j - b.offset) / b.scale
    }

    pub fn log_det(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.unit_log_det() + b.size as f64 * b.scale.ln())
            .sum()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.scale * b.unit_trace()).sum()
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v.len())?;
        let mut out = vec![0.0; self.dim];
        for b in &self.blocks {
            let r = b.offset..b.offset + b.size;
            b.unit_matvec(&v[r.clone()], &mut out[r.clone()]);
            for o in &mut out[r] {
                *o *= b.scale;
            }
        }
        Ok(out)
    }

    /// `Σ⁻¹ v`.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v.len())?;
        let mut out = vec![0.0; self.dim];
        for b in &self.blocks {
            let r = b.offset..b.offset + b.size;
            b.unit_solve(&v[r.clone()], &mut out[r.clone()]);
            for o in &mut out[r] {
                *o /= b.scale;
            }
        }
        Ok(out)
    }

    /// `vᵀ Σ⁻¹ v`.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        Ok(dot(v, &self.solve(v)?))
    }

    /// Fills `out` with a draw from `N(0, Σ)`, block by block.
    pub fn sample_into(&self, rng: &mut RandomStream, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim, "sample buffer has the wrong length");
        for b in &self.blocks {
            let slot = &mut out[b.offset..b.offset + b.size];
            b.unit_sample(rng, slot);
            let s = b.scale.sqrt();
            for o in slot {
                *o *= s;
            }
        }
    }

    pub fn to_dense(&self) -> SymmetricMatrix {
        let mut s = SymmetricMatrix::zeros(self.dim);
        for b in &self.blocks {
            for i in 0..b.size {
                for j in 0..=i {
                    s.set(b.offset + i, b.offset + j, b.scale * b.unit_entry(i, j));
                }
            }
        }
        s
    }

    /// `tr(Σ_a⁻¹ Σ_b)`, summing only index pairs that share a block in both.
    pub fn trace_inverse_product(a: &StructuredCovariance, b: &StructuredCovariance) -> Result<f64> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                expected: a.dim,
                found: b.dim,
            });
        }
        let mut total = 0.0;
        let mut kb = 0;
        for j in 0..a.dim {
            let ba = a.block_of(j);
            while b.blocks[kb].offset + b.blocks[kb].size <= j {
                kb += 1;
            }
            let bb = &b.blocks[kb];
            let mut lo = ba.offset.max(bb.offset);
            let mut hi = (ba.offset + ba.size).min(bb.offset + bb.size);
            let band = match (bandwidth_of(&ba.kind, true), bandwidth_of(&bb.kind, false)) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
            if let Some(w) = band {
                lo = lo.max(j.saturating_sub(w));
                hi = hi.min(j + w + 1);
            }
            let mut acc = 0.0;
            for i in lo..hi {
                let inv = ba.unit_inverse_entry(j - ba.offset, i - ba.offset) / ba.scale;
                acc += inv * bb.scale * bb.unit_entry(i - bb.offset, j - bb.offset);
            }
            total += acc;
        }
        Ok(total)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cholesky, qr_orthogonal};

    fn orthonormal(t: usize, r: usize, seed: u64) -> Matrix {
        let mut rng = RandomStream::new(seed);
        let m = Matrix::from_fn(t, r, |_, _| rng.normal());
        qr_orthogonal(&m).unwrap()
    }

    fn zoo() -> StructuredCovariance {
        StructuredCovariance::from_blocks(vec![
            BlockSpec::new(4, BlockKind::EquiCorrelation { rho: 0.6 }).with_scale(1.5),
            BlockSpec::new(5, BlockKind::ArToeplitz { rho: 0.7 }).with_scale(2.0),
            BlockSpec::new(1, BlockKind::ArToeplitz { rho: 0.4 }),
            BlockSpec::new(6, BlockKind::InverseArToeplitz { rho: 0.9 }).with_scale(1.3),
            BlockSpec::new(3, BlockKind::Identity).with_scale(0.5),
            BlockSpec::new(
                6,
                BlockKind::Spiked {
                    basis: orthonormal(6, 2, 3),
                    spikes: vec![9.0, 4.0],
                    base: 1.0,
                },
            ),
            BlockSpec::new(
                3,
                BlockKind::Spiked {
                    basis: orthonormal(3, 3, 4),
                    spikes: vec![5.0, 2.0, 0.5],
                    base: 1.0,
                },
            ),
        ])
        .unwrap()
    }

    fn dense_inverse(s: &SymmetricMatrix) -> Matrix {
        let f = cholesky(s).unwrap();
        let n = s.dim();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = f.solve(&e).unwrap();
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }

    #[test]
    fn closed_forms_match_dense() {
        let c = zoo();
        let dense = c.to_dense();
        let f = cholesky(&dense).unwrap();
        assert!((f.log_det() - c.log_det()).abs() < 1e-10 * c.log_det().abs().max(1.0));
        assert!((dense.trace() - c.trace()).abs() < 1e-10 * c.trace());
        let inv = dense_inverse(&dense);
        let n = c.dim();
        for i in 0..n {
            for j in 0..n {
                assert!((c.entry(i, j) - dense.get(i, j)).abs() < 1e-14);
                assert!((c.inverse_entry(i, j) - inv.get(i, j)).abs() < 1e-9, "({i},{j})");
            }
        }
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mv = c.matvec(&v).unwrap();
        let mv_dense = dense.matvec(&v).unwrap();
        let sv = c.solve(&v).unwrap();
        let sv_dense = f.solve(&v).unwrap();
        for i in 0..n {
            assert!((mv[i] - mv_dense[i]).abs() < 1e-12);
            assert!((sv[i] - sv_dense[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_inverse_product_matches_dense() {
        let a = zoo();
        let b = StructuredCovariance::from_blocks(vec![
            BlockSpec::new(7, BlockKind::InverseArToeplitz { rho: 0.5 }),
            BlockSpec::new(10, BlockKind::EquiCorrelation { rho: 0.3 }).with_scale(2.0),
            BlockSpec::new(11, BlockKind::ArToeplitz { rho: 0.8 }),
        ])
        .unwrap();
        for (x, y) in [(&a, &b), (&b, &a), (&a, &a)] {
            let inv = dense_inverse(&x.to_dense());
            let yd = y.to_dense().to_dense();
            let prod = inv.matmul(&yd).unwrap();
            let expected: f64 = (0..x.dim()).map(|i| prod.get(i, i)).sum();
            let got = StructuredCovariance::trace_inverse_product(x, y).unwrap();
            assert!((got - expected).abs() < 1e-9 * expected.abs(), "{got} vs {expected}");
        }
    }

    #[test]
    fn scaled_multiplies_everything() {
        let c = zoo();
        let s = c.scaled(1.3).unwrap();
        assert!((s.log_det() - c.log_det() - c.dim() as f64 * 1.3f64.ln()).abs() < 1e-10);
        assert!((s.entry(5, 6) - 1.3 * c.entry(5, 6)).abs() < 1e-15);
        assert!(c.scaled(0.0).is_err());
    }

    #[test]
    fn dense_materialization_is_positive_definite() {
        for p in [1, 2, 17, 256] {
            let blocks = vec![
                BlockSpec::new(p / 3, BlockKind::EquiCorrelation { rho: 0.9 }),
                BlockSpec::new(p / 3, BlockKind::InverseArToeplitz { rho: 0.9 }),
                BlockSpec::new(p - 2 * (p / 3), BlockKind::ArToeplitz { rho: 0.7 }).with_scale(1.3),
            ];
            let c = StructuredCovariance::from_blocks(blocks).unwrap();
            assert!(cholesky(&c.to_dense()).is_ok(), "p = {p}");
        }
    }

    #[test]
    fn invalid_blocks_rejected() {
        for kind in [
            BlockKind::EquiCorrelation { rho: 1.0 },
            BlockKind::ArToeplitz { rho: -1.0 },
            BlockKind::EquiCorrelation { rho: -0.5 },
        ] {
            assert!(StructuredCovariance::from_blocks(vec![BlockSpec::new(3, kind)]).is_err());
        }
        assert!(StructuredCovariance::identity(0).is_err());
    }

    fn empirical_cov(c: &StructuredCovariance, n: usize, seed: u64) -> Matrix {
        let p = c.dim();
        let mut rng = RandomStream::new(seed);
        let mut x = vec![0.0; p];
        let mut acc = Matrix::zeros(p, p);
        for _ in 0..n {
            c.sample_into(&mut rng, &mut x);
            for i in 0..p {
                for j in 0..p {
                    acc.set(i, j, acc.get(i, j) + x[i] * x[j]);
                }
            }
        }
        Matrix::from_fn(p, p, |i, j| acc.get(i, j) / n as f64)
    }

    #[test]
    fn equicorrelation_sampler_law() {
        let c = StructuredCovariance::from_blocks(vec![BlockSpec::new(3, BlockKind::EquiCorrelation { rho: 0.9 })]).unwrap();
        let emp = empirical_cov(&c, 100_000, 11);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.9 };
                assert!((emp.get(i, j) - expected).abs() < 0.02);
            }
        }
    }

    #[test]
    fn identity_sampler_law() {
        let c = StructuredCovariance::identity(20).unwrap();
        let emp = empirical_cov(&c, 100_000, 12);
        for i in 0..20 {
            for j in 0..20 {
                if i != j {
                    assert!(emp.get(i, j).abs() <= 0.02);
                }
            }
        }
    }

    #[test]
    fn mixed_sampler_law() {
        let c = zoo();
        let emp = empirical_cov(&c, 200_000, 13);
        let dense = c.to_dense();
        for i in 0..c.dim() {
            for j in 0..c.dim() {
                let tol = 0.05 * (dense.get(i, i) * dense.get(j, j)).sqrt().max(1.0);
                assert!((emp.get(i, j) - dense.get(i, j)).abs() < tol, "({i},{j})");
            }
        }
    }
}
