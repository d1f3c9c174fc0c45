//! Dense linear algebra used by the solvers.
//!
//! Everything is `f64`, row-major and single-threaded, so results are
//! bit-reproducible for a fixed input.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Seed of the power-iteration start vector.
const POWER_ITERATION_SEED: u64 = 0x5eed_0f_a11;

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;
pub const DEFAULT_SPECTRAL_MAX_ITERS: usize = 10_000;

/// A dense, row-major `rows × cols` matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "matrix row",
                expected: cols,
                found: bad.len(),
            });
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("matvec input", self.cols, x.len())?;
        check_len("matvec output", self.rows, out.len())?;
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
        Ok(())
    }

    /// `Aᵀ r`.
    pub fn matvec_transpose(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        self.matvec_transpose_into(r, &mut out)?;
        Ok(out)
    }

    pub fn matvec_transpose_into(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("transpose matvec input", self.rows, r.len())?;
        check_len("transpose matvec output", self.cols, out.len())?;
        out.fill(0.0);
        for (&ri, row) in r.iter().zip(self.data.chunks_exact(self.cols)) {
            if ri != 0.0 {
                axpy(ri, row, out);
            }
        }
        Ok(())
    }

    /// `AᵀA + shift·I`, the system matrix of the ADMM x-update.
    pub fn gram_plus_identity(&self, shift: f64) -> DenseMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for row in self.data.chunks_exact(n) {
            for (i, &ai) in row.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                // Upper triangle only; mirrored below.
                axpy(ai, &row[i..], &mut g[i * n + i..(i + 1) * n]);
            }
        }
        for i in 0..n {
            g[i * n + i] += shift;
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        DenseMatrix {
            rows: n,
            cols: n,
            data: g,
        }
    }
}

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// Inner product with four independent accumulators (fixed summation order).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += a·x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn distance2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Largest singular value `‖A‖₂` by power iteration on `AᵀA`.
///
/// Iterates until the Rayleigh quotient changes by less than `tol` relative
/// to itself. The start vector is drawn from a fixed seed.
pub fn spectral_norm(a: &DenseMatrix, tol: f64, max_iters: usize) -> Result<f64> {
    if !(tol > 0.0) || max_iters == 0 {
        return Err(Error::InvalidParameter(
            "spectral norm needs tol > 0 and max_iters >= 1".into(),
        ));
    }
    if a.data.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMatrix);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);
    let mut v: Vec<f64> = (0..a.cols).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut av = vec![0.0; a.rows];
    let mut atav = vec![0.0; a.cols];
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        a.matvec_into(&v, &mut av)?;
        a.matvec_transpose_into(&av, &mut atav)?;
        // v has unit norm, so ‖Av‖² is the Rayleigh quotient of AᵀA.
        let next = dot(&av, &av);
        let norm = norm2(&atav);
        if norm == 0.0 {
            // Start vector in the null space; restart from a coordinate
            // direction with a nonzero column.
            let j = (0..a.cols)
                .find(|&j| (0..a.rows).any(|i| a.get(i, j) != 0.0))
                .ok_or(Error::ZeroMatrix)?;
            v.fill(0.0);
            v[j] = 1.0;
            continue;
        }
        for (vi, wi) in v.iter_mut().zip(&atav) {
            *vi = wi / norm;
        }
        if (next - estimate).abs() <= tol * next {
            return Ok(next.sqrt());
        }
        estimate = next;
    }
    Err(Error::NoConvergence { iters: max_iters })
}

/// Cholesky factor `M = L Lᵀ` of a symmetric positive definite matrix.
///
/// Only the lower triangle of `M` is read.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
    /// `Lᵀ`, row-major, so back substitution reads contiguous rows.
    upper: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch {
                context: "cholesky (square matrix)",
                expected: m.rows,
                found: m.cols,
            });
        }
        let n = m.rows;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let row_j = &l[j * n..j * n + j];
            let d = m.get(j, j) - dot(row_j, row_j);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let diag = d.sqrt();
            l[j * n + j] = diag;
            let (head, tail) = l.split_at_mut((j + 1) * n);
            let row_j = &head[j * n..j * n + j];
            for (k, row_i) in tail.chunks_exact_mut(n).enumerate() {
                let i = j + 1 + k;
                row_i[j] = (m.get(i, j) - dot(&row_i[..j], row_j)) / diag;
            }
        }
        let mut upper = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                upper[j * n + i] = l[i * n + j];
            }
        }
        Ok(Self {
            n,
            lower: l,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("cholesky rhs", self.n, b.len())?;
        let n = self.n;
        let l = &self.lower;
        let mut x = b.to_vec();
        for i in 0..n {
            let s = dot(&l[i * n..i * n + i], &x[..i]);
            x[i] = (x[i] - s) / l[i * n + i];
        }
        let u = &self.upper;
        for i in (0..n).rev() {
            let s = dot(&u[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / u[i * n + i];
        }
        Ok(x)
    }
}

/// Solves `M x = b` for symmetric positive definite `M`.
pub fn solve_spd(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Cholesky::factor(m)?.solve(b)
}
