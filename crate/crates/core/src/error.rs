use thiserror::Error;

/// Errors raised by state construction, the functionals and the verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("covariance is not symmetric (max asymmetry {0:e})")]
    NonSymmetricCovariance(f64),

    #[error(
        "covariance violates the uncertainty principle (min eigenvalue of cov + i/2 Omega = {0:e})"
    )]
    UnphysicalCovariance(f64),

    #[error("state is not invertible (min symplectic eigenvalue {0} is within eps_inv of 1/2)")]
    NotInvertible(f64),

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("negative evolution time {0}")]
    NegativeTime(f64),

    #[error("evolution time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("quadrature index {index} out of range for {len} quadratures")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("Fock truncation at dim {dim} leaves tail mass {tail:e}")]
    TailMassTooLarge { dim: usize, tail: f64 },

    #[error("support violation: weight {0:e} outside the support of the reference state")]
    SupportViolation(f64),

    #[error("invalid mixture weights: {0}")]
    BadWeights(String),

    #[error("grid too small: |chi| = {0:e} on the boundary ring")]
    GridTooSmall(f64),

    #[error("quadrature for {quantity} unconverged: {coarse} vs {fine} on the refined grid")]
    QuadratureUnconverged {
        quantity: &'static str,
        coarse: f64,
        fine: f64,
    },

    #[error("state is not centered (|mean| = {0:e})")]
    NotCentered(f64),

    #[error("Wigner function is negative (min {0:e})")]
    NegativeWigner(f64),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("finite-difference step {0:e} is below the roundoff floor")]
    StepTooSmall(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
