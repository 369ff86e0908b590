//! Random projection matrices.
//!
//! A [`ProjectionMatrix`] is a pure function of `(family, d, p, seed)`: entries
//! are drawn in row-major order from a [`RandomStream`] seeded with `seed`.
//!
//! * `StandardNormal`: one Box–Muller normal per entry.
//! * `SparseThreePoint`: one uniform `u` per entry; the entry is `-1` when
//!   `u < q`, `+1` when `q <= u < 2q`, and `0` otherwise, with `q = 1 / (2√p)`.
//!   Only the nonzero entries are stored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionFamily {
    StandardNormal,
    SparseThreePoint,
}

impl ProjectionFamily {
    /// Short name used in reports and on the command line (`sn` / `stp`).
    pub fn short_name(self) -> &'static str {
        match self {
            ProjectionFamily::StandardNormal => "sn",
            ProjectionFamily::SparseThreePoint => "stp",
        }
    }

    /// Probability that a sparse three-point entry equals `+1` (and also `-1`).
    pub fn stp_sign_probability(p: usize) -> f64 {
        0.5 / (p as f64).sqrt()
    }
}

impl fmt::Display for ProjectionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ProjectionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sn" | "normal" | "standard_normal" | "gaussian" => Ok(ProjectionFamily::StandardNormal),
            "stp" | "sparse" | "sparse_three_point" => Ok(ProjectionFamily::SparseThreePoint),
            other => Err(Error::InvalidParameter(format!("unknown projection family '{other}'"))),
        }
    }
}

/// Compressed sparse rows with `±1` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSigns {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Dense(Vec<f64>),
    Sparse(SparseSigns),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    d: usize,
    p: usize,
    family: ProjectionFamily,
    seed: u64,
    payload: Payload,
}

/// Draws a `d × p` projection matrix.
pub fn generate(family: ProjectionFamily, d: usize, p: usize, seed: u64) -> Result<ProjectionMatrix> {
    if d == 0 || d > p {
        return Err(Error::InvalidDimensions { d, p });
    }
    let mut stream = RandomStream::new(seed);
    let payload = match family {
        ProjectionFamily::StandardNormal => {
            let mut data = vec![0.0; d * p];
            stream.fill_normal(&mut data);
            Payload::Dense(data)
        }
        ProjectionFamily::SparseThreePoint => {
            let q = ProjectionFamily::stp_sign_probability(p);
            let expected = (2.0 * q * (d * p) as f64).ceil() as usize;
            let mut row_ptr = Vec::with_capacity(d + 1);
            let mut cols = Vec::with_capacity(expected + expected / 4 + 8);
            let mut signs = Vec::with_capacity(cols.capacity());
            row_ptr.push(0);
            for _ in 0..d {
                for j in 0..p {
                    let u = stream.uniform();
                    if u < q {
                        cols.push(j);
                        signs.push(-1);
                    } else if u < 2.0 * q {
                        cols.push(j);
                        signs.push(1);
                    }
                }
                row_ptr.push(cols.len());
            }
            Payload::Sparse(SparseSigns { row_ptr, cols, signs })
        }
    };
    Ok(ProjectionMatrix {
        d,
        p,
        family,
        seed,
        payload,
    })
}

impl ProjectionMatrix {
    /// Reassembles a matrix from a stored payload, checking its shape.
    pub fn from_payload(family: ProjectionFamily, d: usize, p: usize, seed: u64, payload: Payload) -> Result<Self> {
        if d == 0 || d > p {
            return Err(Error::InvalidDimensions { d, p });
        }
        match (&payload, family) {
            (Payload::Dense(v), ProjectionFamily::StandardNormal) => {
                if v.len() != d * p {
                    return Err(Error::DimensionMismatch {
                        expected: d * p,
                        found: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::ModelFormat("non-finite projection entry".into()));
                }
            }
            (Payload::Sparse(s), ProjectionFamily::SparseThreePoint) => {
                if s.row_ptr.len() != d + 1 || s.row_ptr[0] != 0 || s.cols.len() != s.signs.len() {
                    return Err(Error::ModelFormat("malformed sparse projection".into()));
                }
                if *s.row_ptr.last().unwrap() != s.cols.len() || s.row_ptr.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::ModelFormat("malformed sparse row pointers".into()));
                }
                for r in 0..d {
                    let cols = &s.cols[s.row_ptr[r]..s.row_ptr[r + 1]];
                    if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= p) {
                        return Err(Error::ModelFormat(format!("invalid column indices in projection row {r}")));
                    }
                }
                if s.signs.iter().any(|&v| v != 1 && v != -1) {
                    return Err(Error::ModelFormat("sparse projection entries must be +1 or -1".into()));
                }
            }
            _ => return Err(Error::ModelFormat("payload does not match projection family".into())),
        }
        Ok(ProjectionMatrix {
            d,
            p,
            family,
            seed,
            payload,
        })
    }

    /// A dense `StandardNormal`-family matrix with the given entries, used for
    /// hand-built projections in tests and diagnostics.
    pub fn from_dense(m: &Matrix, seed: u64) -> Result<Self> {
        ProjectionMatrix::from_payload(
            ProjectionFamily::StandardNormal,
            m.rows(),
            m.cols(),
            seed,
            Payload::Dense(m.as_slice().to_vec()),
        )
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn family(&self) -> ProjectionFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Number of stored entries (`d·p` for dense payloads).
    pub fn nnz(&self) -> usize {
        match &self.payload {
            Payload::Dense(v) => v.len(),
            Payload::Sparse(s) => s.cols.len(),
        }
    }

    /// Nonzero `(row, col, value)` triplets of a sparse payload, in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.payload {
            Payload::Dense(v) => (0..self.d)
                .flat_map(|r| (0..self.p).map(move |c| (r, c)))
                .filter_map(|(r, c)| {
                    let x = v[r * self.p + c];
                    (x != 0.0).then_some((r, c, x))
                })
                .collect(),
            Payload::Sparse(s) => (0..self.d)
                .flat_map(|r| (s.row_ptr[r]..s.row_ptr[r + 1]).map(move |k| (r, k)))
                .map(|(r, k)| (r, s.cols[k], s.signs[k] as f64))
                .collect(),
        }
    }

    /// Row `r` as a dense vector of length `p`.
    pub fn row_dense(&self, r: usize) -> Vec<f64> {
        match &self.payload {
            Payload::Dense(v) => v[r * self.p..(r + 1) * self.p].to_vec(),
            Payload::Sparse(s) => {
                let mut out = vec![0.0; self.p];
                for k in s.row_ptr[r]..s.row_ptr[r + 1] {
                    out[s.cols[k]] = s.signs[k] as f64;
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.d, self.p);
        for r in 0..self.d {
            m.row_mut(r).copy_from_slice(&self.row_dense(r));
        }
        m
    }

    /// Whether some row of the matrix is entirely zero.
    pub fn has_zero_row(&self) -> bool {
        match &self.payload {
            Payload::Dense(v) => v.chunks(self.p).any(|row| row.iter().all(|x| *x == 0.0)),
            Payload::Sparse(s) => s.row_ptr.windows(2).any(|w| w[0] == w[1]),
        }
    }

    /// Writes `R x` into `out` (length `d`).
    #[inline]
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.p);
        match &self.payload {
            Payload::Dense(v) => {
                for (r, o) in out.iter_mut().enumerate() {
                    *o = dot(&v[r * self.p..(r + 1) * self.p], x);
                }
            }
            Payload::Sparse(s) => {
                for (r, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for k in s.row_ptr[r]..s.row_ptr[r + 1] {
                        let xv = x[s.cols[k]];
                        if s.signs[k] > 0 {
                            acc += xv;
                        } else {
                            acc -= xv;
                        }
                    }
                    *o = acc;
                }
            }
        }
    }

    /// `R z` for a single observation.
    pub fn project_vec(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: z.len(),
            });
        }
        let mut out = vec![0.0; self.d];
        self.project_into(z, &mut out);
        Ok(out)
    }

    /// Projects every row of `x` (`n × p`) to give an `n × d` matrix.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: x.cols(),
            });
        }
        let mut out = Matrix::zeros(x.rows(), self.d);
        for i in 0..x.rows() {
            self.project_into(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }
}
