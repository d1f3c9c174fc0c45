mod common;

use common::{jacobi_sigma_max, naive_matvec, naive_matvec_transpose};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsebench::linalg::{self, DenseMatrix, Cholesky, DEFAULT_SPECTRAL_MAX_ITERS, DEFAULT_SPECTRAL_TOL};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

#[test]
fn spectral_norm_matches_jacobi_svd() {
    for seed in 0..3 {
        let a = random_matrix(20, 30, seed);
        let want = jacobi_sigma_max(&a);
        let got = linalg::spectral_norm(&a, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITERS).unwrap();
        assert!((got - want).abs() <= 1e-6 * want, "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn cholesky_solves_random_spd_systems() {
    for seed in 0..5 {
        let b = random_matrix(40, 25, seed);
        let m = b.gram_plus_identity(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let rhs: Vec<f64> = (0..25).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = Cholesky::factor(&m).unwrap().solve(&rhs).unwrap();
        let r = naive_matvec(&m, &x);
        let worst = r.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-10, "seed {seed}: residual {worst:e}");
        assert_eq!(linalg::solve_spd(&m, &rhs).unwrap(), x);
    }
}

proptest! {
    #[test]
    fn matvecs_match_naive_loops(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let a = random_matrix(rows, cols, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r: Vec<f64> = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
        for (u, v) in a.matvec(&x).unwrap().iter().zip(naive_matvec(&a, &x)) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
        for (u, v) in a.matvec_transpose(&r).unwrap().iter().zip(naive_matvec_transpose(&a, &r)) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
        // ⟨Ax, r⟩ = ⟨x, Aᵀr⟩
        let lhs = linalg::dot(&a.matvec(&x).unwrap(), &r);
        let rhs = linalg::dot(&x, &a.matvec_transpose(&r).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn spectral_norm_is_homogeneous(seed in any::<u64>(), c in 0.1f64..10.0) {
        let a = random_matrix(6, 9, seed);
        let s = linalg::spectral_norm(&a, 1e-12, 100_000).unwrap();
        let sc = linalg::spectral_norm(&a.scaled(c), 1e-12, 100_000).unwrap();
        prop_assert!((sc - c * s).abs() <= 1e-6 * c * s);
    }
}
