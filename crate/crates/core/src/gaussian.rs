//! Gaussian states in covariance form and the symplectic linear algebra that
//! goes with them.
//!
//! Quadratures are ordered `(q1, p1, ..., qn, pn)` and `hbar = 1`, so
//! `[R_j, R_k] = i Omega_jk` and the vacuum covariance is `I/2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Lower bound on the spectrum of `cov + i/2 Omega` for a physical state.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Gap above 1/2 separating pure modes from invertible ones.
pub const EPS_INV: f64 = 1e-9;
/// Maximum reconstruction residual accepted from the Williamson decomposition.
pub const WILLIAMSON_RESIDUAL_TOL: f64 = 1e-7;

/// The block-diagonal symplectic form `Omega = [[0, 1], [-1, 0]]^{(+) n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            matrix: omega(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Builds the `2n x 2n` symplectic form.
pub fn omega(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// Inverse of a symplectic matrix, `S^{-1} = Omega S^T Omega^T`.
pub fn symplectic_inverse(s: &DMatrix<f64>) -> DMatrix<f64> {
    let om = omega(s.nrows() / 2);
    &om * s.transpose() * om.transpose()
}

/// Residual `max |S Omega S^T - Omega|`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let om = omega(s.nrows() / 2);
    (s * &om * s.transpose() - om).amax()
}

/// An `n`-mode Gaussian state given by its mean vector and covariance matrix.
///
/// Construction checks dimensions and symmetry only; physicality is checked
/// by [`GaussianState::validate`] and by every operation that needs it.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Outcome of [`GaussianState::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validation {
    pub physical: bool,
    pub invertible: bool,
    /// Smallest eigenvalue of the Hermitian matrix `cov + i/2 Omega`.
    pub min_eigenvalue: f64,
    /// Smallest symplectic eigenvalue.
    pub min_nu: f64,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() {
            return Err(Error::DimensionMismatch {
                what: "covariance columns",
                expected: cov.nrows(),
                found: cov.ncols(),
            });
        }
        if cov.nrows() == 0 || cov.nrows() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                what: "covariance (must be 2n x 2n, n >= 1)",
                expected: 2 * (cov.nrows() / 2).max(1),
                found: cov.nrows(),
            });
        }
        if mean.len() != cov.nrows() {
            return Err(Error::DimensionMismatch {
                what: "mean vector",
                expected: cov.nrows(),
                found: mean.len(),
            });
        }
        if cov.iter().chain(mean.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite entry in state".into()));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NonSymmetricCovariance(asym));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    /// Centered state with the given covariance.
    pub fn centered(cov: DMatrix<f64>) -> Result<Self> {
        let d = cov.nrows();
        Self::new(DVector::zeros(d), cov)
    }

    pub fn vacuum(n: usize) -> Self {
        Self::thermal(n, 0.5)
    }

    /// Product of `n` identical thermal modes with symplectic eigenvalue `nu`.
    pub fn thermal(n: usize, nu: f64) -> Self {
        Self {
            mean: DVector::zeros(2 * n),
            cov: DMatrix::identity(2 * n, 2 * n) * nu,
        }
    }

    /// Single-mode coherent state centered at `(q, p)`.
    pub fn coherent(q: f64, p: f64) -> Self {
        Self {
            mean: DVector::from_vec(vec![q, p]),
            cov: DMatrix::identity(2, 2) * 0.5,
        }
    }

    /// Reads the `{"n", "mean", "cov"}` JSON form.
    pub fn from_spec(spec: &GaussianSpec) -> Result<Self> {
        let d = 2 * spec.n;
        if spec.n == 0 {
            return Err(Error::DimensionMismatch {
                what: "mode count",
                expected: 1,
                found: 0,
            });
        }
        if spec.mean.len() != d {
            return Err(Error::DimensionMismatch {
                what: "mean vector",
                expected: d,
                found: spec.mean.len(),
            });
        }
        if spec.cov.len() != d {
            return Err(Error::DimensionMismatch {
                what: "covariance rows",
                expected: d,
                found: spec.cov.len(),
            });
        }
        if let Some(row) = spec.cov.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                what: "covariance columns",
                expected: d,
                found: row.len(),
            });
        }
        let cov = DMatrix::from_fn(d, d, |i, j| spec.cov[i][j]);
        Self::new(DVector::from_column_slice(&spec.mean), cov)
    }

    pub fn to_spec(&self) -> GaussianSpec {
        let d = self.dim();
        GaussianSpec {
            n: self.n(),
            mean: self.mean.iter().copied().collect(),
            cov: (0..d)
                .map(|i| (0..d).map(|j| self.cov[(i, j)]).collect())
                .collect(),
        }
    }

    /// Number of modes.
    pub fn n(&self) -> usize {
        self.cov.nrows() / 2
    }

    /// Number of quadratures, `2n`.
    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn is_centered(&self) -> bool {
        self.mean.iter().all(|&x| x == 0.0)
    }

    /// Physicality and invertibility flags.
    ///
    /// Fails with `UnphysicalCovariance` when `cov + i/2 Omega` has an
    /// eigenvalue below `-1e-10`.
    pub fn validate(&self) -> Result<Validation> {
        let min_eigenvalue = uncertainty_min_eigenvalue(&self.cov);
        if !(min_eigenvalue >= -PHYSICALITY_TOL) {
            return Err(Error::UnphysicalCovariance(min_eigenvalue));
        }
        let min_nu = symplectic_eigenvalues(&self.cov)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        Ok(Validation {
            physical: true,
            invertible: min_nu > 0.5 + EPS_INV,
            min_eigenvalue,
            min_nu,
        })
    }

    pub(crate) fn require_physical(&self) -> Result<()> {
        self.validate().map(|_| ())
    }

    /// Williamson normal form `cov = S diag(nu1, nu1, ..., nun, nun) S^T`.
    pub fn williamson(&self) -> Result<SymplecticData> {
        self.require_physical()?;
        williamson(&self.cov)
    }

    /// The quadratic-form matrix `Gamma` and normalization of
    /// `rho = C exp(-R^T Gamma R)` for the centered version of this state.
    pub fn gamma(&self) -> Result<GammaMatrix> {
        GammaMatrix::from_symplectic(&self.williamson()?)
    }

    /// Weyl displacement: `mean <- mean + z`.
    pub fn displace(&self, z: &[f64]) -> Result<Self> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "displacement vector",
                expected: self.dim(),
                found: z.len(),
            });
        }
        let mut out = self.clone();
        for (m, dz) in out.mean.iter_mut().zip(z) {
            *m += dz;
        }
        Ok(out)
    }

    /// The state `exp(i theta R_j) rho exp(-i theta R_j)` for zero-based
    /// quadrature index `j`.
    ///
    /// Expanding `exp(-i theta R_j) R_k exp(i theta R_j) = R_k - i theta [R_j, R_k]
    /// = R_k + theta Omega_jk`, the mean moves by `theta * Omega^T e_j` (row `j`
    /// of `Omega`) and the covariance is untouched. For `j = q_1` this is a
    /// shift of `+theta` along `p_1`.
    pub fn conjugate_by_exp_irj(&self, j: usize, theta: f64) -> Result<Self> {
        let d = self.dim();
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, len: d });
        }
        let mut out = self.clone();
        let partner = j ^ 1;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.mean[partner] += sign * theta;
        Ok(out)
    }

    /// Replaces the covariance, keeping the mean.
    pub(crate) fn with_cov(&self, cov: DMatrix<f64>) -> Self {
        Self {
            mean: self.mean.clone(),
            cov,
        }
    }

    /// Tensor product with another state, modes of `self` first.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.dim(), other.dim());
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.cov);
        cov.view_mut((a, a), (b, b)).copy_from(&other.cov);
        let mean =
            DVector::from_iterator(a + b, self.mean.iter().chain(other.mean.iter()).copied());
        GaussianState { mean, cov }
    }
}

/// JSON form of a Gaussian state: `{"n": int, "mean": [2n], "cov": [[2n]; 2n]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub n: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Williamson decomposition output.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticData {
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<f64>,
    /// Symplectic transform with `cov = S diag(nu) S^T`.
    pub s: DMatrix<f64>,
}

impl SymplecticData {
    /// `diag(nu1, nu1, ..., nun, nun)`.
    pub fn normal_form(&self) -> DMatrix<f64> {
        let d = 2 * self.nu.len();
        DMatrix::from_fn(d, d, |i, j| if i == j { self.nu[i / 2] } else { 0.0 })
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.s * self.normal_form() * self.s.transpose()
    }
}

/// `Gamma` and `ln C` such that a centered invertible state is `C exp(-R^T Gamma R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub gamma: DMatrix<f64>,
    pub log_c: f64,
    /// Per-mode `gamma_k = arccoth(2 nu_k)`, in Williamson order.
    pub mode_gammas: Vec<f64>,
}

impl GammaMatrix {
    /// `Gamma = S^{-T} (+)_k gamma_k I_2 S^{-1}` and
    /// `ln C = -1/2 ln det(cov + i/2 Omega) = -1/2 sum_k ln(nu_k^2 - 1/4)`.
    pub fn from_symplectic(data: &SymplecticData) -> Result<Self> {
        let min_nu = data.nu.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_nu > 0.5 + EPS_INV) {
            return Err(Error::NotInvertible(min_nu));
        }
        let mode_gammas: Vec<f64> = data.nu.iter().map(|&nu| arccoth_2nu(nu)).collect();
        let d = 2 * data.nu.len();
        let g = DMatrix::from_fn(d, d, |i, j| if i == j { mode_gammas[i / 2] } else { 0.0 });
        let s_inv = symplectic_inverse(&data.s);
        let gamma = s_inv.transpose() * g * &s_inv;
        let gamma = (&gamma + gamma.transpose()) * 0.5;
        let log_c = -0.5
            * data
                .nu
                .iter()
                .map(|&nu| ((nu - 0.5) * (nu + 0.5)).ln())
                .sum::<f64>();
        Ok(Self {
            gamma,
            log_c,
            mode_gammas,
        })
    }

    pub fn trace(&self) -> f64 {
        self.gamma.trace()
    }
}

/// `arccoth(2 nu) = 1/2 ln((nu + 1/2) / (nu - 1/2))`.
pub fn arccoth_2nu(nu: f64) -> f64 {
    0.5 * (1.0 / (nu - 0.5)).ln_1p()
}

/// Smallest eigenvalue of the Hermitian matrix `cov + i/2 Omega`.
pub fn uncertainty_min_eigenvalue(cov: &DMatrix<f64>) -> f64 {
    let d = cov.nrows();
    let om = omega(d / 2);
    let h = DMatrix::from_fn(d, d, |i, j| Complex64::new(cov[(i, j)], 0.5 * om[(i, j)]));
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Symplectic eigenvalues (descending) as the positive eigenvalues of the
/// Hermitian matrix `i Omega cov`'s similar form `i cov^{1/2} Omega cov^{1/2}`.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sqrt = sym_sqrt(cov)?;
    let om = omega(cov.nrows() / 2);
    let a = &sqrt * om * &sqrt;
    let h = a.map(|x| Complex64::new(0.0, x));
    let mut ev: Vec<f64> = h
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .filter(|&x| x > 0.0)
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev.len() != cov.nrows() / 2 {
        return Err(Error::NumericalFailure(
            "symplectic spectrum does not pair up".into(),
        ));
    }
    Ok(ev)
}

/// Symmetric square root and inverse square root of a positive-definite matrix.
fn sym_sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::SingularCovariance);
    }
    let v = &eig.eigenvectors;
    let root = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_root = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok((v * root * v.transpose(), v * inv_root * v.transpose()))
}

fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_sqrt_pair(m).map(|(r, _)| r)
}

/// Williamson decomposition of a positive-definite covariance.
///
/// With `A = cov^{-1/2} Omega cov^{-1/2}` (real antisymmetric, spectrum
/// `+-i/nu_k`), each eigenvector `x + iy` of the Hermitian matrix `iA` with
/// eigenvalue `1/nu_k` yields an orthonormal pair on which `A` acts as
/// `[[0, 1/nu], [-1/nu, 0]]` in the basis `(sqrt2 y, sqrt2 x)`. Collecting these
/// pairs into an orthogonal `O` gives `S = cov^{1/2} O diag(nu)^{-1/2}`.
pub fn williamson(cov: &DMatrix<f64>) -> Result<SymplecticData> {
    let d = cov.nrows();
    let n = d / 2;
    let (root, inv_root) = sym_sqrt_pair(cov)?;
    let om = omega(n);
    let a = &inv_root * om * &inv_root;
    let a = (&a - a.transpose()) * 0.5;
    let h = a.map(|x| Complex64::new(0.0, x));
    let eig = h.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    if order.len() != n {
        return Err(Error::NumericalFailure(
            "antisymmetric spectrum does not pair up".into(),
        ));
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut blocks: Vec<(f64, DMatrix<f64>)> = order
        .drain(..)
        .map(|i| {
            let lambda = eig.eigenvalues[i];
            let v = eig.eigenvectors.column(i);
            let nu = 1.0 / lambda;
            let mut cols = DMatrix::zeros(d, 2);
            for r in 0..d {
                cols[(r, 0)] = sqrt2 * v[r].im;
                cols[(r, 1)] = sqrt2 * v[r].re;
            }
            let scale_q = (1.0 / nu).sqrt();
            let s_cols = &root * cols * scale_q;
            (nu, s_cols)
        })
        .collect();

    sort_blocks(&mut blocks);

    let mut s = DMatrix::zeros(d, d);
    let mut nu = Vec::with_capacity(n);
    for (k, (v, cols)) in blocks.into_iter().enumerate() {
        nu.push(v);
        s.view_mut((0, 2 * k), (d, 2)).copy_from(&cols);
    }
    let data = SymplecticData { nu, s };

    let scale = cov.amax().max(1.0);
    let residual = (data.reconstruct() - cov).amax() / scale;
    if !(residual <= WILLIAMSON_RESIDUAL_TOL) {
        return Err(Error::NumericalFailure(format!(
            "Williamson reconstruction residual {residual:e}"
        )));
    }
    Ok(data)
}

/// Descending `nu`; degenerate blocks ordered lexicographically by their
/// `S` columns so that outputs are reproducible.
fn sort_blocks(blocks: &mut [(f64, DMatrix<f64>)]) {
    const DEGENERACY_TOL: f64 = 1e-12;
    blocks.sort_by(|(na, ca), (nb, cb)| {
        if (na - nb).abs() > DEGENERACY_TOL * na.abs().max(nb.abs()) {
            nb.total_cmp(na)
        } else {
            ca.iter()
                .zip(cb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        }
    });
}
