//! Numerics for the quantum diffusion semigroup on continuous-variable systems.
//!
//! Gaussian states are handled exactly in covariance form ([`gaussian`],
//! [`semigroup`], [`functionals`]); single-mode non-Gaussian states live on a
//! sampled characteristic-function grid ([`grid`]); a truncated Fock-basis
//! oracle ([`fock`]) cross-checks the closed forms; [`verify`] checks the
//! functional inequalities of the semigroup on seeded corpora.

pub mod config;
pub mod corpus;
pub mod error;
pub mod fock;
pub mod functionals;
pub mod gaussian;
pub mod grid;
pub mod semigroup;
pub mod verify;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use functionals::EntropicProfile;
pub use gaussian::{GammaMatrix, GaussianSpec, GaussianState, SymplecticData, SymplecticForm};
pub use grid::{GridConfig, GridState};
pub use num_complex::Complex64;
