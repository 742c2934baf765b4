//! Truncated Fock-basis density matrices for one mode.
//!
//! This is a brute-force oracle for the Gaussian closed forms: thermal,
//! coherent and displaced-thermal states are built as explicit matrices and
//! every quantity is read off their eigendecomposition.
//!
//! Phase-space points map to coherent amplitudes as `alpha = (q + i p) / sqrt(2)`,
//! so that `|<0|alpha>|^2 = exp(-|z|^2 / 2)` matches the Gaussian overlap of
//! the vacuum with the vacuum displaced by `z`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 200;
/// Largest tail mass accepted before renormalizing.
pub const TAIL_TOL: f64 = 1e-12;
/// Eigenvalues of the reference state below this floor count as outside its support.
pub const SUPPORT_FLOOR: f64 = 1e-14;

/// Coherent amplitude of the phase-space point `(q, p)`.
pub fn amplitude(q: f64, p: f64) -> Complex64 {
    Complex64::new(q, p) / std::f64::consts::SQRT_2
}

/// A truncated single-mode density matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl FockDensityMatrix {
    /// Checks the tail mass `1 - tr`, then renormalizes.
    fn from_truncated(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        let tr = matrix.trace().re;
        let tail = 1.0 - tr;
        if !(tail < TAIL_TOL) {
            return Err(Error::TailMassTooLarge { dim, tail });
        }
        let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5 / tr, 0.0);
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let shifted = &self.matrix + DMatrix::identity(self.dim(), self.dim());
        let mut ev: Vec<f64> = shifted
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x - 1.0)
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigenvalues and eigenvectors.
    ///
    /// The QR iteration breaks down on strongly graded rank-deficient
    /// matrices, so the decomposition is taken of `rho + I`.
    fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let shifted = &self.matrix + DMatrix::identity(self.dim(), self.dim());
        let eig = shifted.symmetric_eigen();
        let values: Vec<f64> = eig.eigenvalues.iter().map(|x| x - 1.0).collect();
        if values.iter().any(|x| !x.is_finite()) || eig.eigenvectors.iter().any(|x| !x.is_finite())
        {
            return Err(Error::NumericalFailure("Fock eigendecomposition".into()));
        }
        Ok((values, eig.eigenvectors))
    }

    /// Convex combination of matrices of equal dimension.
    pub fn mixture(parts: &[(f64, FockDensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyCorpus)?;
        let dim = first.1.dim();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| !(*w > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights(format!(
                "weights must be positive and sum to 1, got {total}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (w, part) in parts {
            if part.dim() != dim {
                return Err(Error::DimensionMismatch {
                    what: "Fock mixture component",
                    expected: dim,
                    found: part.dim(),
                });
            }
            m += &part.matrix * Complex64::new(*w, 0.0);
        }
        Ok(Self { matrix: m })
    }
}

/// Thermal occupation probabilities `p_k = N^k / (N + 1)^{k+1}` with `N = nu - 1/2`.
fn thermal_weights(nu: f64, dim: usize) -> Result<Vec<f64>> {
    if !(nu >= 0.5) {
        return Err(Error::UnphysicalCovariance(nu - 0.5));
    }
    let occ = nu - 0.5;
    let ratio = occ / (occ + 1.0);
    let mut p = Vec::with_capacity(dim);
    let mut current = 1.0 / (occ + 1.0);
    for _ in 0..dim {
        p.push(current);
        current *= ratio;
    }
    Ok(p)
}

/// Thermal state with symplectic eigenvalue `nu`.
pub fn thermal_fock(nu: f64, dim: usize) -> Result<FockDensityMatrix> {
    let p = thermal_weights(nu, dim)?;
    let m = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        p.into_iter().map(|x| Complex64::new(x, 0.0)),
    ));
    FockDensityMatrix::from_truncated(m)
}

/// Coherent-state amplitudes `e^{-|alpha|^2/2} alpha^k / sqrt(k!)`.
fn coherent_vector(alpha: Complex64, dim: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 0..dim {
        v[k] = c;
        c = c * alpha / ((k + 1) as f64).sqrt();
    }
    v
}

/// `|alpha><alpha|`.
pub fn coherent_fock(alpha: Complex64, dim: usize) -> Result<FockDensityMatrix> {
    let v = coherent_vector(alpha, dim);
    FockDensityMatrix::from_truncated(&v * v.adjoint())
}

/// Matrix elements `<m|D(alpha)|n>` for `m, n < dim`.
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    displacement_block(alpha, dim, dim)
}

/// `f_j = sqrt(j! / (j + k)!) x^{k/2} e^{-x/2} L_j^{(k)}(x)` for `j < len`.
///
/// Runs the three-term Laguerre recurrence forward in the degree `j`, which
/// is stable here, with a running log-scale so that tiny starting values do
/// not underflow.
fn laguerre_functions(k: usize, x: f64, len: usize) -> Vec<f64> {
    let kf = k as f64;
    let ln_fact_k: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let mut log_scale = if x > 0.0 {
        0.5 * kf * x.ln() - 0.5 * x - 0.5 * ln_fact_k
    } else if k == 0 {
        0.0
    } else {
        return vec![0.0; len];
    };
    let mut out = Vec::with_capacity(len);
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..len {
        out.push(cur * log_scale.exp());
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf * (jf + kf)).sqrt() * prev)
            / ((jf + 1.0) * (jf + kf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        let size = cur.abs().max(prev.abs());
        if size > 1e100 {
            prev /= size;
            cur /= size;
            log_scale += size.ln();
        }
    }
    out
}

/// `<m|D(alpha)|n>` for `m < rows`, `n < cols`, from
/// `<n+k|D|n> = e^{i k phi} f_n^{(k)}(|alpha|^2)` and
/// `<m|D|m+k> = (-1)^k e^{-i k phi} f_m^{(k)}(|alpha|^2)`, `alpha = r e^{i phi}`.
fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let (r, phi) = alpha.to_polar();
    let x = r * r;
    let mut d = DMatrix::zeros(rows, cols);
    for k in 0..rows {
        let phase = Complex64::from_polar(1.0, k as f64 * phi);
        for (n, f) in laguerre_functions(k, x, cols.min(rows - k))
            .into_iter()
            .enumerate()
        {
            d[(n + k, n)] = phase * f;
        }
    }
    for k in 1..cols {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let phase = Complex64::from_polar(sign, -(k as f64) * phi);
        for (m, f) in laguerre_functions(k, x, rows.min(cols - k))
            .into_iter()
            .enumerate()
        {
            d[(m, m + k)] = phase * f;
        }
    }
    d
}

/// Extra levels summed over when forming `ln` of a displaced thermal state.
const LOG_PADDING: usize = 100;

/// The leading `dim x dim` block of `ln(D(alpha) rho_thermal(nu) D(alpha)^dagger)
/// = D(alpha) diag(ln p_k) D(alpha)^dagger`.
///
/// Built from the exact thermal spectrum, so it keeps the tiny eigenvalues
/// that an eigendecomposition of the truncated matrix cannot resolve.
pub fn displaced_thermal_log(nu: f64, alpha: Complex64, dim: usize) -> Result<DMatrix<Complex64>> {
    if !(nu > 0.5) {
        return Err(Error::NotInvertible(nu));
    }
    let cols = dim + LOG_PADDING;
    let occ = nu - 0.5;
    let log_ratio = (occ / (occ + 1.0)).ln();
    let log_p0 = -(occ + 1.0).ln();
    let d = displacement_block(alpha, dim, cols);
    let mut scaled = d.clone();
    for k in 0..cols {
        scaled
            .column_mut(k)
            .scale_mut(log_p0 + k as f64 * log_ratio);
    }
    Ok(scaled * d.adjoint())
}

/// `Tr a (ln a - L)` for a precomputed logarithm `L` of the reference state.
pub fn relative_entropy_with_log(a: &FockDensityMatrix, log_b: &DMatrix<Complex64>) -> Result<f64> {
    if log_b.nrows() != a.dim() || log_b.ncols() != a.dim() {
        return Err(Error::DimensionMismatch {
            what: "Fock logarithm",
            expected: a.dim(),
            found: log_b.nrows(),
        });
    }
    let cross: f64 = a
        .matrix
        .iter()
        .zip(log_b.transpose().iter())
        .map(|(x, y)| (x * y).re)
        .sum();
    Ok(-spectral_entropy(a) - cross)
}

/// `D(alpha) rho_thermal(nu) D(alpha)^dagger`.
pub fn displaced_thermal_fock(nu: f64, alpha: Complex64, dim: usize) -> Result<FockDensityMatrix> {
    let p = thermal_weights(nu, dim)?;
    let d = displacement_matrix(alpha, dim);
    let mut scaled = d.clone();
    for (k, pk) in p.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*pk);
    }
    FockDensityMatrix::from_truncated(scaled * d.adjoint())
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `-Tr(rho ln rho)` from the spectrum.
pub fn spectral_entropy(m: &FockDensityMatrix) -> f64 {
    -m.spectrum().into_iter().map(xlogx).sum::<f64>()
}

/// `Tr rho^2` from the spectrum.
pub fn spectral_purity(m: &FockDensityMatrix) -> f64 {
    m.spectrum().into_iter().map(|x| x * x).sum()
}

/// `Tr(a b)`.
pub fn spectral_overlap(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "Fock overlap",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.matrix
        .iter()
        .zip(b.matrix.transpose().iter())
        .map(|(x, y)| (x * y).re)
        .sum())
}

/// `Tr a (ln a - ln b)` with `ln b` from the eigendecomposition of `b`.
pub fn spectral_relative_entropy(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "Fock relative entropy",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (values, vectors) = b.eigen()?;
    let mut cross = 0.0;
    let mut outside = 0.0;
    for (i, &lambda) in values.iter().enumerate() {
        let v = vectors.column(i);
        let weight = (v.adjoint() * &a.matrix * v)[(0, 0)].re;
        if lambda < SUPPORT_FLOOR {
            outside += weight.max(0.0);
        } else {
            cross += weight * lambda.ln();
        }
    }
    if outside > TAIL_TOL {
        return Err(Error::SupportViolation(outside));
    }
    Ok(-spectral_entropy(a) - cross)
}
