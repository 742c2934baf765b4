//! Run configuration shared by the verifiers and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DEFAULT_DIM;
use crate::functionals::{DEFAULT_DELTA_T, DEFAULT_DELTA_THETA};
use crate::grid::{GridConfig, DEFAULT_EXTENT, DEFAULT_M, DEFAULT_QUADRATURE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Time step for first derivatives along the flow.
    pub delta_t: f64,
    /// Angle step for second differences of relative entropy.
    pub delta_theta: f64,
    /// Relative slack on every `rhs - lhs >= 0` check.
    pub margin_tolerance: f64,
    /// Largest change of a grid integral under one grid doubling.
    pub quadrature_tolerance: f64,
    /// Upper bound on second differences of the entropy power.
    pub concavity_tolerance: f64,
    /// Relative step for second differences of the entropy power.
    pub concavity_step: f64,
    /// Allowed deviation of the fitted purity exponent from `-n/2`.
    pub slope_tolerance: f64,
    pub grid_l: f64,
    pub grid_m: usize,
    pub fock_dim: usize,
    /// Overrides the derived Nash constant for every mode count.
    pub nash_constant: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            delta_t: DEFAULT_DELTA_T,
            delta_theta: DEFAULT_DELTA_THETA,
            margin_tolerance: 1e-9,
            quadrature_tolerance: DEFAULT_QUADRATURE_TOL,
            concavity_tolerance: 1e-8,
            concavity_step: 1e-2,
            slope_tolerance: 0.02,
            grid_l: DEFAULT_EXTENT,
            grid_m: DEFAULT_M,
            fock_dim: DEFAULT_DIM,
            nash_constant: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_t", self.delta_t),
            ("delta_theta", self.delta_theta),
            ("margin_tolerance", self.margin_tolerance),
            ("quadrature_tolerance", self.quadrature_tolerance),
            ("concavity_tolerance", self.concavity_tolerance),
            ("concavity_step", self.concavity_step),
            ("slope_tolerance", self.slope_tolerance),
            ("grid_l", self.grid_l),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(c) = self.nash_constant {
            if !(c > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "nash_constant must be positive, got {c}"
                )));
            }
        }
        if self.fock_dim < 2 {
            return Err(Error::InvalidConfig("fock_dim must be at least 2".into()));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<GridConfig> {
        GridConfig::new(self.grid_l, self.grid_m)
    }
}
