//! Test-only oracles, independent of the solver code paths they check.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sparsebench::linalg::DenseMatrix;

/// Brute-force `argmin_x penalty(x) + ½(x − z)²` over `[−halfwidth, halfwidth]`.
///
/// Grid search (the grid includes 0), then golden-section refinement on the
/// bracketing cells, then bisection on the sign of a five-point
/// finite-difference derivative. The penalty is assumed smooth away from 0.
pub fn oracle_prox_1d(z: f64, penalty: impl Fn(f64) -> f64, halfwidth: f64, grid: usize) -> f64 {
    let grid = grid.max(2) + grid % 2;
    let f = |x: f64| penalty(x) + 0.5 * (x - z) * (x - z);
    // f(a) − f(b), arranged to limit cancellation between the quadratics.
    let diff = |a: f64, b: f64| penalty(a) - penalty(b) + 0.5 * (a - b) * (a + b - 2.0 * z);

    let point = |j: usize| halfwidth * (2.0 * j as f64 - grid as f64) / grid as f64;
    let best = (0..=grid)
        .min_by(|&i, &j| f(point(i)).total_cmp(&f(point(j))))
        .expect("nonempty grid");
    let (mut lo, mut hi) = (point(best.saturating_sub(1)), point((best + 1).min(grid)));

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if diff(c, d) < 0.0 {
            hi = d;
            d = c;
            c = hi - inv_phi * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + inv_phi * (hi - lo);
        }
    }
    let mut x = 0.5 * (lo + hi);
    if f(0.0) <= f(x) && diff(0.0, x) <= 0.0 {
        x = 0.0;
    }

    let deriv = |t: f64| {
        let h = 1e-3 * t.abs().max(1e-12);
        let p = |s: f64| penalty(t + s * h);
        (-p(2.0) + 8.0 * p(1.0) - 8.0 * p(-1.0) + p(-2.0)) / (12.0 * h) + (t - z)
    };
    let delta = 1e-6 * (1.0 + x.abs());
    let (mut a, mut b) = (x - delta, x + delta);
    if deriv(a) < 0.0 && deriv(b) > 0.0 {
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if deriv(mid) > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        x = 0.5 * (a + b);
    }
    x
}

/// Random `(z, λ, ε)` with `λ < ε²`; half the draws land near the zero band edge.
pub fn random_log_triple(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let eps = 10f64.powf(rng.random_range(-2.0..0.3));
    let lambda = eps * eps * rng.random_range(1e-4..0.999);
    let z = if rng.random::<bool>() {
        rng.random_range(-5.0..5.0)
    } else {
        let edge = lambda / eps;
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        sign * edge * rng.random_range(0.5..1.5)
    };
    (z, lambda, eps)
}

/// Textbook triple-loop `A x`.
pub fn naive_matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.rows()];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[i] += a.get(i, j) * x[j];
        }
    }
    out
}

pub fn naive_matvec_transpose(a: &DenseMatrix, r: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.cols()];
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            out[j] += a.get(i, j) * r[i];
        }
    }
    out
}

/// Largest singular value from the eigenvalues of `AᵀA` by cyclic Jacobi
/// rotations. Meant for small matrices only.
pub fn jacobi_sigma_max(a: &DenseMatrix) -> f64 {
    let n = a.cols();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..a.rows()).map(|k| a.get(k, i) * a.get(k, j)).sum();
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| g[i][j] * g[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if g[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (g[q][q] - g[p][p]) / (2.0 * g[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (gkp, gkq) = (g[k][p], g[k][q]);
                    g[k][p] = c * gkp - s * gkq;
                    g[k][q] = s * gkp + c * gkq;
                }
                for k in 0..n {
                    let (gpk, gqk) = (g[p][k], g[q][k]);
                    g[p][k] = c * gpk - s * gqk;
                    g[q][k] = s * gpk + c * gqk;
                }
            }
        }
    }
    (0..n).map(|i| g[i][i]).fold(0.0, f64::max).sqrt()
}

/// Lasso solution by cyclic coordinate descent, an optimizer independent of
/// the proximal-gradient and ADMM code paths.
pub fn coordinate_descent_lasso(a: &DenseMatrix, y: &[f64], alpha: f64, sweeps: usize) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let col_sq: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a.get(i, j).powi(2)).sum()).collect();
    let mut x = vec![0.0; n];
    let mut r = y.to_vec();
    for _ in 0..sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let rho: f64 = (0..m).map(|i| a.get(i, j) * r[i]).sum::<f64>() + col_sq[j] * x[j];
            let new = rho.signum() * (rho.abs() - alpha).max(0.0) / col_sq[j];
            let delta = new - x[j];
            if delta != 0.0 {
                for i in 0..m {
                    r[i] -= a.get(i, j) * delta;
                }
                x[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < 1e-15 {
            break;
        }
    }
    x
}
