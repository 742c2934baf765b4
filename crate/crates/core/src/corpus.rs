//! Seeded random Gaussian states and grid-safe mixtures.
//!
//! Random symplectic matrices use the Euler decomposition
//! `S = O1 Z O2`: `O1, O2` orthogonal-symplectic from Haar unitaries (QR of a
//! complex Gaussian matrix with phase-fixed `R`) and `Z` a product of
//! single-mode squeezers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gaussian::GaussianState;

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random `n x n` unitary.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for v in q.column_mut(k).iter_mut() {
            *v *= phase;
        }
    }
    q
}

/// The orthogonal-symplectic image of a unitary, `[[X, -Y], [Y, X]]` in
/// `(q..., p...)` ordering, permuted to `(q1, p1, ...)`.
pub fn orthogonal_symplectic(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |a, b| {
        let (i, j) = (a / 2, b / 2);
        let z = u[(i, j)];
        match (a % 2, b % 2) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Random symplectic matrix with squeezing parameters in `[-squeeze, squeeze]`.
pub fn random_symplectic(n: usize, squeeze: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let o1 = orthogonal_symplectic(&random_unitary(n, rng));
    let o2 = orthogonal_symplectic(&random_unitary(n, rng));
    let mut z = DVector::zeros(2 * n);
    for k in 0..n {
        let r = if squeeze > 0.0 {
            rng.random_range(-squeeze..=squeeze)
        } else {
            0.0
        };
        z[2 * k] = r.exp();
        z[2 * k + 1] = (-r).exp();
    }
    o1 * DMatrix::from_diagonal(&z) * o2
}

/// Sampling ranges for random Gaussian states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSampler {
    pub nu_min: f64,
    pub nu_max: f64,
    pub squeeze: f64,
    /// Means are drawn uniformly from `[-mean_scale, mean_scale]`; zero gives centered states.
    pub mean_scale: f64,
}

impl Default for StateSampler {
    fn default() -> Self {
        Self {
            nu_min: 0.5 + 1e-3,
            nu_max: 10.0,
            squeeze: 1.0,
            mean_scale: 0.0,
        }
    }
}

impl StateSampler {
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> GaussianState {
        let s = random_symplectic(n, self.squeeze, rng);
        let mut d = DVector::zeros(2 * n);
        let mut nus: Vec<f64> = (0..n)
            .map(|_| rng.random_range(self.nu_min..=self.nu_max))
            .collect();
        nus.sort_by(|a, b| b.total_cmp(a));
        for (k, nu) in nus.iter().enumerate() {
            d[2 * k] = *nu;
            d[2 * k + 1] = *nu;
        }
        let cov = &s * DMatrix::from_diagonal(&d) * s.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        let mean = DVector::from_fn(2 * n, |_, _| {
            if self.mean_scale > 0.0 {
                rng.random_range(-self.mean_scale..=self.mean_scale)
            } else {
                0.0
            }
        });
        GaussianState::new(mean, cov).expect("sampled covariance is symmetric")
    }
}

/// A convex mixture of one to four single-mode Gaussians that fits the
/// default grid: component covariances have eigenvalues in `[0.37, 3.9]`
/// and means lie in `[-3, 3]^2`.
pub fn random_grid_mixture(rng: &mut impl Rng) -> Vec<(f64, GaussianState)> {
    let k = rng.random_range(1..=4usize);
    let sampler = StateSampler {
        nu_min: 0.5,
        nu_max: 3.0,
        squeeze: 0.15,
        mean_scale: 3.0,
    };
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..k - 1].iter().sum();
    weights[k - 1] = 1.0 - head;
    weights
        .into_iter()
        .map(|w| (w, sampler.sample(1, rng)))
        .collect()
}
