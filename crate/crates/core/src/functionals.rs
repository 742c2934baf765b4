//! Closed-form entropic and Dirichlet functionals of Gaussian states.
//!
//! Purity, Dirichlet form and Hilbert-Schmidt overlaps come from Gaussian
//! integrals of the characteristic function (`Tr(A B) = (2pi)^{-n} int
//! conj(chi_A) chi_B`). Entropy and relative entropy use the symplectic
//! spectrum and the `C exp(-R^T Gamma R)` form. All logarithms are natural.

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gaussian::{symplectic_eigenvalues, GaussianState};
use crate::semigroup::shift_cov;

/// Below this gap a mode counts as pure in the entropy.
const PURE_MODE_GAP: f64 = 1e-12;

/// Default central-difference step in time.
pub const DEFAULT_DELTA_T: f64 = 1e-5;
/// Default step for second differences in the conjugation angle.
pub const DEFAULT_DELTA_THETA: f64 = 1e-4;

/// Entropy of one mode with symplectic eigenvalue `nu`:
/// `(nu + 1/2) ln(nu + 1/2) - (nu - 1/2) ln(nu - 1/2)`.
pub fn mode_entropy(nu: f64) -> f64 {
    let x = nu - 0.5;
    if x < PURE_MODE_GAP {
        return 0.0;
    }
    if x < 1.0 {
        (nu + 0.5) * (nu + 0.5).ln() - x * x.ln()
    } else {
        // same expression, rearranged to avoid cancelling two large terms
        (nu + 0.5) * (1.0 / x).ln_1p() + x.ln()
    }
}

fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m.clone().cholesky().ok_or(Error::SingularCovariance)?;
    Ok(2.0
        * chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|x| x.ln())
            .sum::<f64>())
}

/// `Tr rho^2 = 1 / (2^n sqrt(det cov))`.
pub fn purity(state: &GaussianState) -> Result<f64> {
    state.require_physical()?;
    let n = state.n() as f64;
    let ld = log_det_spd(state.cov())?;
    Ok((-n * std::f64::consts::LN_2 - 0.5 * ld).exp())
}

/// Von Neumann entropy `sum_k h(nu_k)` in nats.
pub fn entropy(state: &GaussianState) -> Result<f64> {
    state.require_physical()?;
    Ok(symplectic_eigenvalues(state.cov())?
        .into_iter()
        .map(mode_entropy)
        .sum())
}

/// `E = exp(S / n)`.
pub fn entropy_power(state: &GaussianState) -> Result<f64> {
    Ok((entropy(state)? / state.n() as f64).exp())
}

/// `D(rho || sigma) = -S(rho) - ln C_sigma + tr(Gamma_sigma cov_rho)
///  + dmu^T Gamma_sigma dmu`, with `dmu = mu_rho - mu_sigma`.
pub fn relative_entropy(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            what: "relative entropy arguments",
            expected: sigma.dim(),
            found: rho.dim(),
        });
    }
    let g = sigma.gamma()?;
    let s_rho = entropy(rho)?;
    let dmu = rho.mean() - sigma.mean();
    let quad = dmu.dot(&(&g.gamma * &dmu));
    let tr = (&g.gamma * rho.cov()).trace();
    Ok(-s_rho - g.log_c + tr + quad)
}

/// Entropy variation rate `J = sum_j Tr(rho [R_j, [R_j, ln rho]]) = 2 tr Gamma`.
///
/// With `ln rho = ln C - R^T Gamma R` and `[R_j, R_k] = i Omega_jk`:
/// `[R_j, R^T Gamma R] = 2i (Omega Gamma R)_j` and
/// `[R_j, [R_j, R^T Gamma R]] = -2 (Omega Gamma Omega^T)_jj`, a c-number.
/// Summing over `j` gives `2 tr(Omega Gamma Omega^T) = 2 tr Gamma`.
pub fn fisher_j(state: &GaussianState) -> Result<f64> {
    Ok(2.0 * state.gamma()?.trace())
}

/// `J` rebuilt from its definition: the sum over quadratures of the second
/// central difference of `theta -> D(rho || e^{i theta R_j} rho e^{-i theta R_j})`.
pub fn fisher_j_from_divergence(state: &GaussianState, delta_theta: f64) -> Result<f64> {
    if !(delta_theta > 0.0) {
        return Err(Error::StepTooSmall(delta_theta));
    }
    let d0 = relative_entropy(state, state)?;
    let mut total = 0.0;
    for j in 0..state.dim() {
        let plus = relative_entropy(state, &state.conjugate_by_exp_irj(j, delta_theta)?)?;
        let minus = relative_entropy(state, &state.conjugate_by_exp_irj(j, -delta_theta)?)?;
        total += (plus - 2.0 * d0 + minus) / (delta_theta * delta_theta);
    }
    Ok(total)
}

/// Dirichlet form `-Tr(rho L(rho)) = 1/4 (2pi)^{-n} int |z|^2 |chi|^2 dz
///  = tr(cov^{-1}) / (2^{n+3} sqrt(det cov))`.
pub fn dirichlet_form(state: &GaussianState) -> Result<f64> {
    state.require_physical()?;
    let cov = state.cov();
    let ld = log_det_spd(cov)?;
    let inv = cov
        .clone()
        .cholesky()
        .ok_or(Error::SingularCovariance)?
        .inverse();
    let n = state.n() as i32;
    Ok(inv.trace() * 2f64.powi(-(n + 3)) * (-0.5 * ld).exp())
}

/// Hilbert-Schmidt overlap `Tr(a b) = det(cov_a + cov_b)^{-1/2}
///  exp(-1/2 dmu^T (cov_a + cov_b)^{-1} dmu)`.
pub fn hs_overlap(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "overlap arguments",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    a.require_physical()?;
    b.require_physical()?;
    let sum = a.cov() + b.cov();
    let chol = sum.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let ld = log_det_spd(&sum)?;
    let dmu = a.mean() - b.mean();
    let quad = dmu.dot(&chol.solve(&dmu));
    Ok((-0.5 * ld - 0.5 * quad).exp())
}

fn entropy_along_flow(state: &GaussianState, t: f64) -> Result<f64> {
    entropy(&shift_cov(state, t))
}

/// `dS(rho_t)/dt` by central differences with step `delta`; a second-order
/// forward stencil is used when `t < delta`.
pub fn entropy_rate(state: &GaussianState, t: f64, delta: f64) -> Result<f64> {
    flow_derivative(state, t, delta, entropy_along_flow)
}

pub(crate) fn flow_derivative(
    state: &GaussianState,
    t: f64,
    delta: f64,
    f: impl Fn(&GaussianState, f64) -> Result<f64>,
) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::StepTooSmall(delta));
    }
    let center = f(state, t)?;
    let (diff, deriv) = if t >= delta {
        let back = f(state, t - delta)?;
        let fwd = f(state, t + delta)?;
        (fwd - back, (fwd - back) / (2.0 * delta))
    } else {
        let f1 = f(state, t + delta)?;
        let f2 = f(state, t + 2.0 * delta)?;
        (f1 - center, (-3.0 * center + 4.0 * f1 - f2) / (2.0 * delta))
    };
    if diff.abs() < 64.0 * f64::EPSILON * center.abs() {
        return Err(Error::StepTooSmall(delta));
    }
    Ok(deriv)
}

fn serialize_fisher<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("divergent"),
    }
}

/// All Gaussian functionals of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropicProfile {
    pub purity: f64,
    pub entropy: f64,
    pub entropy_power: f64,
    /// `None` when some mode is pure and `J` diverges.
    #[serde(serialize_with = "serialize_fisher")]
    pub fisher_j: Option<f64>,
    pub dirichlet: f64,
}

impl EntropicProfile {
    pub fn of(state: &GaussianState) -> Result<Self> {
        let validation = state.validate()?;
        let entropy = entropy(state)?;
        Ok(Self {
            purity: purity(state)?,
            entropy,
            entropy_power: (entropy / state.n() as f64).exp(),
            fisher_j: if validation.invertible {
                Some(fisher_j(state)?)
            } else {
                None
            },
            dirichlet: dirichlet_form(state)?,
        })
    }
}
