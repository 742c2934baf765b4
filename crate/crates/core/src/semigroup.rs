//! The quantum diffusion semigroup on Gaussian states.
//!
//! The flow multiplies the characteristic function by `exp(-|z|^2 t / 4)`.
//! Writing the Gaussian characteristic function as
//! `exp(i (mu, z) - 1/2 z^T cov z)`, the product is
//! `exp(i (mu, z) - 1/2 z^T (cov + t/2 I) z)`, so the mean is fixed and
//! `cov -> cov + (t/2) I`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::purity;
use crate::gaussian::GaussianState;

/// Evolution time, `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct EvolutionParams {
    t: f64,
}

impl EvolutionParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `Lambda_t` on a Gaussian state.
pub fn evolve_gaussian(state: &GaussianState, t: f64) -> Result<GaussianState> {
    let t = EvolutionParams::new(t)?.t();
    state.require_physical()?;
    Ok(shift_cov(state, t))
}

/// `cov + (t/2) I` without checks. Negative `t` is allowed so that
/// finite differences can straddle a time point.
pub(crate) fn shift_cov(state: &GaussianState, t: f64) -> GaussianState {
    let d = state.dim();
    let cov = state.cov() + DMatrix::<f64>::identity(d, d) * (0.5 * t);
    state.with_cov(cov)
}

/// The heat kernel `g_{t/2}(z) = (pi t)^{-n} exp(-|z|^2 / t)` on `R^{2n}`.
pub fn gaussian_kernel(t: f64, z: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    if z.is_empty() || z.len() % 2 != 0 {
        return Err(Error::DimensionMismatch {
            what: "phase-space point",
            expected: 2 * (z.len() / 2).max(1),
            found: z.len(),
        });
    }
    let n = (z.len() / 2) as i32;
    let r2: f64 = z.iter().map(|x| x * x).sum();
    Ok((std::f64::consts::PI * t).powi(-n) * (-r2 / t).exp())
}

/// Evidence that `Lambda_t` moves a given state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoInvariantWitness {
    pub t: f64,
    /// Frobenius norm of `cov_t - cov`, equal to `(t/2) sqrt(2n)`.
    pub cov_displacement: f64,
    pub purity_before: f64,
    pub purity_after: f64,
}

pub fn no_invariant_state_witness(state: &GaussianState, t: f64) -> Result<NoInvariantWitness> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let evolved = evolve_gaussian(state, t)?;
    Ok(NoInvariantWitness {
        t,
        cov_displacement: (evolved.cov() - state.cov()).norm(),
        purity_before: purity(state)?,
        purity_after: purity(&evolved)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_time_is_identity() {
        let st = GaussianState::thermal(2, 0.9);
        assert_eq!(evolve_gaussian(&st, 0.0).unwrap(), st);
    }

    #[test]
    fn vacuum_at_unit_time_is_thermal_nu_one() {
        let st = evolve_gaussian(&GaussianState::vacuum(1), 1.0).unwrap();
        let nu = st.williamson().unwrap().nu[0];
        assert_relative_eq!(nu, 1.0, epsilon = 1e-12);
        assert_relative_eq!(purity(&st).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn semigroup_law() {
        let st = GaussianState::thermal(1, 0.7)
            .displace(&[0.3, -1.0])
            .unwrap();
        let a = evolve_gaussian(&evolve_gaussian(&st, 0.4).unwrap(), 1.7).unwrap();
        let b = evolve_gaussian(&st, 2.1).unwrap();
        assert_eq!(a.mean(), b.mean());
        assert!((a.cov() - b.cov()).amax() <= 1e-15 * b.cov().amax());
    }

    #[test]
    fn negative_time_rejected() {
        assert!(matches!(
            evolve_gaussian(&GaussianState::vacuum(1), -0.1),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn kernel_at_origin() {
        assert_relative_eq!(
            gaussian_kernel(1.0, &[0.0, 0.0]).unwrap(),
            1.0 / std::f64::consts::PI,
            epsilon = 1e-15
        );
        assert!(matches!(
            gaussian_kernel(0.0, &[0.0, 0.0]),
            Err(Error::NonpositiveTime(_))
        ));
    }

    #[test]
    fn kernel_normalized_with_variance_half_t() {
        let t = 1.3;
        let (l, m) = (12.0, 600);
        let h = 2.0 * l / m as f64;
        let (mut mass, mut var_q) = (0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let q = -l + i as f64 * h;
                let p = -l + j as f64 * h;
                let g = gaussian_kernel(t, &[q, p]).unwrap() * h * h;
                mass += g;
                var_q += q * q * g;
            }
        }
        assert!((mass - 1.0).abs() < 1e-8);
        assert!((var_q - t / 2.0).abs() < 1e-8);
    }

    #[test]
    fn witness_values() {
        let w = no_invariant_state_witness(&GaussianState::vacuum(1), 2.0).unwrap();
        assert_relative_eq!(w.cov_displacement, 2f64.sqrt(), epsilon = 1e-14);
        let w = no_invariant_state_witness(&GaussianState::thermal(1, 1.0), 1.0).unwrap();
        assert_relative_eq!(w.purity_before, 0.5, epsilon = 1e-14);
        assert_relative_eq!(w.purity_after, 1.0 / 3.0, epsilon = 1e-14);
        let w = no_invariant_state_witness(&GaussianState::vacuum(1), 1e-12).unwrap();
        assert!(w.cov_displacement < 1e-11);
    }
}
