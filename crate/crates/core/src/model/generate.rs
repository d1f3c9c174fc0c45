use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::ProblemInstance;
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Parameters of a synthetic compressed-sensing instance.
///
/// `A` has i.i.d. `N(0, 1/m)` entries; `x̃` has `k` nonzeros at uniformly
/// chosen positions with magnitudes uniform in `magnitude` and random signs;
/// `y = A x̃ + η` with `η ~ N(0, noise_std²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerateParams {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_std: f64,
    pub magnitude: (f64, f64),
    pub seed: u64,
}

impl GenerateParams {
    pub const DEFAULT_MAGNITUDE: (f64, f64) = (1.0, 2.0);

    pub fn new(m: usize, n: usize, k: usize, noise_std: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            k,
            noise_std,
            magnitude: Self::DEFAULT_MAGNITUDE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter(format!(
                "dimensions must be positive, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "sparsity k={} exceeds n={}",
                self.k, self.n
            )));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise_std must be finite and nonnegative, got {}",
                self.noise_std
            )));
        }
        let (lo, hi) = self.magnitude;
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "magnitude range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// Draws an instance from a ChaCha8 stream seeded with `params.seed`.
///
/// Draw order: `A` row-major, support indices, magnitudes and signs, noise.
/// Gaussian samples come from `rand_distr::StandardNormal` (ziggurat).
pub fn generate_instance(params: &GenerateParams) -> Result<ProblemInstance> {
    params.validate()?;
    let GenerateParams {
        m,
        n,
        k,
        noise_std,
        magnitude: (lo, hi),
        seed,
    } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let scale = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            scale * g
        })
        .collect();
    let a = DenseMatrix::from_row_major(m, n, data)?;

    let mut positions = index::sample(&mut rng, n, k).into_vec();
    positions.sort_unstable();
    let mut x_true = vec![0.0; n];
    for &i in &positions {
        let mag = if hi > lo {
            Uniform::new(lo, hi)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(&mut rng)
        } else {
            lo
        };
        x_true[i] = if rng.random::<bool>() { mag } else { -mag };
    }

    let mut y = a.matvec(&x_true)?;
    if noise_std > 0.0 {
        for yi in &mut y {
            let e: f64 = StandardNormal.sample(&mut rng);
            *yi += noise_std * e;
        }
    }
    ProblemInstance::new(a, y, Some(x_true), seed, noise_std)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let p = GenerateParams::new(6, 9, 3, 0.1, 42);
        assert_eq!(generate_instance(&p).unwrap(), generate_instance(&p).unwrap());
        let q = GenerateParams { seed: 43, ..p };
        assert_ne!(generate_instance(&p).unwrap(), generate_instance(&q).unwrap());
    }

    #[test]
    fn zero_sparsity_gives_zero_measurements() {
        let inst = generate_instance(&GenerateParams::new(2, 2, 0, 0.0, 7)).unwrap();
        assert_eq!(inst.x_true().unwrap(), &[0.0, 0.0]);
        assert_eq!(inst.y(), &[0.0, 0.0]);
        assert_eq!(inst.true_support().unwrap(), &[] as &[usize]);
    }

    #[test]
    fn noiseless_instance_is_consistent() {
        let inst = generate_instance(&GenerateParams::new(5, 8, 3, 0.0, 11)).unwrap();
        let x = inst.x_true().unwrap().to_vec();
        assert_eq!(inst.residual_norm(&x).unwrap(), 0.0);
        assert_eq!(inst.true_support().unwrap().len(), 3);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(generate_instance(&GenerateParams::new(3, 4, 5, 0.0, 0)).is_err());
        assert!(generate_instance(&GenerateParams::new(0, 4, 1, 0.0, 0)).is_err());
        assert!(generate_instance(&GenerateParams::new(3, 0, 0, 0.0, 0)).is_err());
        let mut p = GenerateParams::new(3, 4, 1, 0.0, 0);
        p.magnitude = (0.0, 1.0);
        assert!(generate_instance(&p).is_err());
    }

    #[test]
    fn degenerate_magnitude_range() {
        let mut p = GenerateParams::new(4, 6, 2, 0.0, 3);
        p.magnitude = (1.5, 1.5);
        let inst = generate_instance(&p).unwrap();
        for &i in inst.true_support().unwrap() {
            assert_eq!(inst.x_true().unwrap()[i].abs(), 1.5);
        }
    }
}
