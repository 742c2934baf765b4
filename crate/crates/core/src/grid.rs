//! Single-mode states as sampled characteristic functions.
//!
//! `chi` is sampled on the square grid `[-L, L)^2` with `m` points per axis,
//! `z_k = -L + k * (2L/m)`, stored row-major with `q` as the slow index. The
//! origin sits at index `(m/2, m/2)`. Integrals are plain Riemann sums, which
//! are spectrally accurate here because every integrand has decayed below
//! `1e-10` at the boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianSpec, GaussianState};

pub const DEFAULT_EXTENT: f64 = 12.0;
pub const DEFAULT_M: usize = 256;
/// Largest `|chi|` tolerated on the outermost ring.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Largest change in a grid integral when `m` is doubled.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-7;
/// Wigner samples above `-WIGNER_POSITIVITY_TOL * max` count as nonnegative.
pub const WIGNER_POSITIVITY_TOL: f64 = 1e-8;
/// Allowed deviation of the Wigner integral from `2 pi`.
pub const WIGNER_INTEGRAL_TOL: f64 = 1e-6;

/// Grid geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub extent: f64,
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            extent: DEFAULT_EXTENT,
            m: DEFAULT_M,
        }
    }
}

impl GridConfig {
    pub fn new(extent: f64, m: usize) -> Result<Self> {
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid extent must be positive, got {extent}"
            )));
        }
        // m divisible by 4 keeps the FFT phase factor at (-1)^(a+b)
        if !m.is_power_of_two() || m < 8 {
            return Err(Error::InvalidConfig(format!(
                "grid size must be a power of two >= 8, got {m}"
            )));
        }
        Ok(Self { extent, m })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.m as f64
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.spacing()
    }

    pub fn refined(&self) -> Self {
        Self {
            extent: self.extent,
            m: 2 * self.m,
        }
    }
}

/// How a grid state was built: mixture components and accumulated flow time.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub components: Vec<(f64, GaussianState)>,
    pub t: f64,
}

#[derive(Serialize)]
struct ComponentRecord {
    weight: f64,
    state: GaussianSpec,
}

#[derive(Serialize)]
struct ProvenanceRecord {
    components: Vec<ComponentRecord>,
    t: f64,
}

/// JSON header attached to exported grids.
#[derive(Serialize)]
pub struct GridHeader {
    extent: f64,
    m: usize,
    provenance: ProvenanceRecord,
}

impl Provenance {
    fn record(&self) -> ProvenanceRecord {
        ProvenanceRecord {
            components: self
                .components
                .iter()
                .map(|(w, s)| ComponentRecord {
                    weight: *w,
                    state: s.to_spec(),
                })
                .collect(),
            t: self.t,
        }
    }
}

/// Sampled characteristic function of a single-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    config: GridConfig,
    chi: Vec<Complex64>,
    provenance: Provenance,
}

fn gaussian_chi(state: &GaussianState, q: f64, p: f64) -> Complex64 {
    let mu = state.mean();
    let c = state.cov();
    let phase = mu[0] * q + mu[1] * p;
    let quad = c[(0, 0)] * q * q + 2.0 * c[(0, 1)] * q * p + c[(1, 1)] * p * p;
    Complex64::from_polar((-0.5 * quad).exp(), phase)
}

fn sample(config: GridConfig, provenance: &Provenance) -> Vec<Complex64> {
    let m = config.m;
    let mut chi = vec![Complex64::new(0.0, 0.0); m * m];
    chi.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let q = config.coord(i);
        for (j, out) in row.iter_mut().enumerate() {
            let p = config.coord(j);
            let damp = (-(q * q + p * p) * provenance.t / 4.0).exp();
            let v: Complex64 = provenance
                .components
                .iter()
                .map(|(w, s)| gaussian_chi(s, q, p) * *w)
                .sum();
            *out = v * damp;
        }
    });
    chi
}

impl GridState {
    /// Samples `chi = sum_i w_i chi_i` for a convex mixture of one-mode Gaussians.
    pub fn from_gaussian_mixture(
        components: &[(f64, GaussianState)],
        config: GridConfig,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::BadWeights("no components".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| !(*w > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights(format!(
                "weights must be positive and sum to 1, got sum {total}"
            )));
        }
        for (_, s) in components {
            if s.n() != 1 {
                return Err(Error::DimensionMismatch {
                    what: "grid component modes",
                    expected: 1,
                    found: s.n(),
                });
            }
            s.require_physical()?;
        }
        let provenance = Provenance {
            components: components.to_vec(),
            t: 0.0,
        };
        let chi = sample(config, &provenance);
        let state = Self {
            config,
            chi,
            provenance,
        };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn from_gaussian(state: &GaussianState, config: GridConfig) -> Result<Self> {
        Self::from_gaussian_mixture(&[(1.0, state.clone())], config)
    }

    pub fn config(&self) -> GridConfig {
        self.config
    }

    pub fn chi(&self) -> &[Complex64] {
        &self.chi
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn chi_at(&self, i: usize, j: usize) -> Complex64 {
        self.chi[i * self.config.m + j]
    }

    pub fn chi_at_origin(&self) -> Complex64 {
        let h = self.config.m / 2;
        self.chi_at(h, h)
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            extent: self.config.extent,
            m: self.config.m,
            provenance: self.provenance.record(),
        }
    }

    /// Unit trace, Hermitian symmetry and boundary decay.
    pub fn check_invariants(&self) -> Result<()> {
        let m = self.config.m;
        let origin = self.chi_at_origin();
        if (origin - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::NumericalFailure(format!("chi(0) = {origin}")));
        }
        for i in 1..m {
            for j in 1..m {
                let a = self.chi_at(i, j);
                let b = self.chi_at(m - i, m - j).conj();
                if (a - b).norm() > 1e-10 {
                    return Err(Error::NumericalFailure(format!(
                        "chi not Hermitian at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        let edge = (0..m)
            .flat_map(|k| [(0, k), (m - 1, k), (k, 0), (k, m - 1)])
            .map(|(i, j)| self.chi_at(i, j).norm())
            .fold(0.0, f64::max);
        if !(edge < BOUNDARY_TOL) {
            return Err(Error::GridTooSmall(edge));
        }
        Ok(())
    }

    /// Multiplies `chi` by the flow multiplier `exp(-|z|^2 t / 4)`.
    pub fn evolve(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        let m = self.config.m;
        let cfg = self.config;
        let mut chi = self.chi.clone();
        chi.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            let q = cfg.coord(i);
            for (j, v) in row.iter_mut().enumerate() {
                let p = cfg.coord(j);
                *v *= (-(q * q + p * p) * t / 4.0).exp();
            }
        });
        let mut provenance = self.provenance.clone();
        provenance.t += t;
        let out = Self {
            config: self.config,
            chi,
            provenance,
        };
        out.check_invariants()?;
        Ok(out)
    }

    /// Resamples the same state at doubled resolution.
    pub fn refined(&self) -> Self {
        let config = self.config.refined();
        Self {
            config,
            chi: sample(config, &self.provenance),
            provenance: self.provenance.clone(),
        }
    }

    fn riemann(&self, weight: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let m = self.config.m;
        let h = self.config.spacing();
        let cfg = self.config;
        let rows: Vec<f64> = self
            .chi
            .par_chunks(m)
            .enumerate()
            .map(|(i, row)| {
                let q = cfg.coord(i);
                row.iter()
                    .enumerate()
                    .map(|(j, v)| weight(q, cfg.coord(j)) * v.norm_sqr())
                    .sum::<f64>()
            })
            .collect();
        rows.iter().sum::<f64>() * h * h
    }

    /// `(2pi)^{-1} sum |chi|^2 h^2` at the current resolution.
    pub fn riemann_purity(&self) -> f64 {
        self.riemann(|_, _| 1.0) / (2.0 * PI)
    }

    /// `1/4 (2pi)^{-1} sum |z|^2 |chi|^2 h^2` at the current resolution.
    pub fn riemann_dirichlet(&self) -> f64 {
        self.riemann(|q, p| q * q + p * p) / (8.0 * PI)
    }
}

fn certified(
    quantity: &'static str,
    state: &GridState,
    tol: f64,
    f: impl Fn(&GridState) -> f64,
) -> Result<f64> {
    let coarse = f(state);
    let fine = f(&state.refined());
    if !((coarse - fine).abs() <= tol) {
        return Err(Error::QuadratureUnconverged {
            quantity,
            coarse,
            fine,
        });
    }
    Ok(coarse)
}

/// Purity `(2pi)^{-1} int |chi|^2`, certified by one grid doubling.
pub fn grid_purity(state: &GridState) -> Result<f64> {
    grid_purity_with_tolerance(state, DEFAULT_QUADRATURE_TOL)
}

pub fn grid_purity_with_tolerance(state: &GridState, tol: f64) -> Result<f64> {
    certified("purity", state, tol, GridState::riemann_purity)
}

/// Dirichlet form `1/4 (2pi)^{-1} int |z|^2 |chi|^2`, certified by one grid doubling.
pub fn grid_dirichlet(state: &GridState) -> Result<f64> {
    grid_dirichlet_with_tolerance(state, DEFAULT_QUADRATURE_TOL)
}

pub fn grid_dirichlet_with_tolerance(state: &GridState, tol: f64) -> Result<f64> {
    certified("dirichlet", state, tol, GridState::riemann_dirichlet)
}

/// Wigner function samples `W(u) = (2pi)^{-1} int e^{-i(u, z)} chi(z) dz` on
/// the reciprocal grid `u_a = (a - m/2) du`, `du = 2pi / (m h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerSamples {
    pub m: usize,
    pub du: f64,
    /// Row-major, `u_q` slow.
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `sum W du^2`, should be `2 pi`.
    pub integral: f64,
    pub nonnegative: bool,
}

impl WignerSamples {
    pub fn coord(&self, a: usize) -> f64 {
        (a as f64 - (self.m / 2) as f64) * self.du
    }
}

/// Discrete inverse transform of `chi`.
///
/// With `z_k = (k - m/2) h` and `u_a = (a - m/2) du`, the kernel
/// `exp(-i u_a z_k) = exp(-2pi i a k / m) (-1)^{a + k}` for `m` divisible by 4,
/// so the transform is a forward FFT sandwiched between sign flips.
pub fn wigner_samples(state: &GridState) -> Result<WignerSamples> {
    let cfg = state.config;
    let m = cfg.m;
    let h = cfg.spacing();
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };

    let mut buf: Vec<Complex64> = state
        .chi
        .iter()
        .enumerate()
        .map(|(idx, v)| v * sign(idx / m + idx % m))
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    for row in buf.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = buf[i * m + j];
        }
        fft.process(&mut col);
        for i in 0..m {
            buf[i * m + j] = col[i];
        }
    }

    let scale = h * h / (2.0 * PI);
    let values: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(idx, v)| v.re * sign(idx / m + idx % m) * scale)
        .collect();
    let du = 2.0 * PI / (m as f64 * h);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let integral = values.iter().sum::<f64>() * du * du;
    if !((integral - 2.0 * PI).abs() <= WIGNER_INTEGRAL_TOL) {
        return Err(Error::QuadratureUnconverged {
            quantity: "wigner integral",
            coarse: integral,
            fine: 2.0 * PI,
        });
    }
    Ok(WignerSamples {
        m,
        du,
        nonnegative: min >= -WIGNER_POSITIVITY_TOL * max,
        values,
        min,
        max,
        integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{dirichlet_form, purity};
    use crate::semigroup::evolve_gaussian;
    use approx::assert_relative_eq;

    fn cat() -> Vec<(f64, GaussianState)> {
        let r = std::f64::consts::SQRT_2;
        vec![
            (0.5, GaussianState::coherent(r, 0.0)),
            (0.5, GaussianState::coherent(-r, 0.0)),
        ]
    }

    #[test]
    fn config_validation() {
        assert!(GridConfig::new(12.0, 200).is_err());
        assert!(GridConfig::new(-1.0, 256).is_err());
        assert!(GridConfig::new(12.0, 256).is_ok());
    }

    #[test]
    fn vacuum_samples_match_closed_form() {
        let g = GridState::from_gaussian(&GaussianState::vacuum(1), GridConfig::default()).unwrap();
        let cfg = g.config();
        for (i, j) in [(0, 0), (100, 130), (128, 128), (200, 17)] {
            let (q, p) = (cfg.coord(i), cfg.coord(j));
            let expected = (-(q * q + p * p) / 4.0).exp();
            assert!((g.chi_at(i, j) - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn vacuum_purity_and_dirichlet() {
        let g = GridState::from_gaussian(&GaussianState::vacuum(1), GridConfig::default()).unwrap();
        assert!((grid_purity(&g).unwrap() - 1.0).abs() < 1e-8);
        assert!((grid_dirichlet(&g).unwrap() - 0.5).abs() < 1e-7);
    }

    #[test]
    fn thermal_purity() {
        let g = GridState::from_gaussian(&GaussianState::thermal(1, 1.5), GridConfig::default())
            .unwrap();
        assert!((grid_purity(&g).unwrap() - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn cat_purity() {
        let g = GridState::from_gaussian_mixture(&cat(), GridConfig::default()).unwrap();
        let expected = 0.5 * (1.0 + (-4f64).exp());
        assert!((grid_purity(&g).unwrap() - expected).abs() < 1e-6);
        assert!(grid_dirichlet(&g).unwrap() > 0.0);
    }

    #[test]
    fn evolution_matches_gaussian_path() {
        let st = GaussianState::centered(nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[0.9, 0.2, 0.2, 0.6],
        ))
        .unwrap()
        .displace(&[0.5, -1.0])
        .unwrap();
        let cfg = GridConfig::default();
        let a = GridState::from_gaussian(&st, cfg)
            .unwrap()
            .evolve(1.0)
            .unwrap();
        let b = GridState::from_gaussian(&evolve_gaussian(&st, 1.0).unwrap(), cfg).unwrap();
        let err = a
            .chi()
            .iter()
            .zip(b.chi())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
        let evolved = evolve_gaussian(&st, 1.0).unwrap();
        assert!((grid_purity(&a).unwrap() - purity(&evolved).unwrap()).abs() < 1e-7);
        assert!((grid_dirichlet(&a).unwrap() - dirichlet_form(&evolved).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn grid_semigroup_law() {
        let g = GridState::from_gaussian_mixture(&cat(), GridConfig::default()).unwrap();
        let a = g.evolve(0.3).unwrap().evolve(0.9).unwrap();
        let b = g.evolve(1.2).unwrap();
        let err = a
            .chi()
            .iter()
            .zip(b.chi())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert_eq!(g.evolve(0.0).unwrap().chi(), g.chi());
    }

    #[test]
    fn wigner_of_vacuum() {
        let g = GridState::from_gaussian(&GaussianState::vacuum(1), GridConfig::default()).unwrap();
        let w = wigner_samples(&g).unwrap();
        assert!(w.min >= -1e-10);
        assert_relative_eq!(w.integral, 2.0 * PI, epsilon = 1e-6);
        // W(u) = 2 exp(-|u|^2) in this normalization
        let c = w.m / 2;
        assert_relative_eq!(w.values[c * w.m + c], 2.0, epsilon = 1e-10);
        let u = w.coord(c + 3);
        assert_relative_eq!(
            w.values[(c + 3) * w.m + c],
            2.0 * (-u * u).exp(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn wigner_of_displaced_state_is_centered_on_mean() {
        let st = GaussianState::thermal(1, 0.8)
            .displace(&[1.0, -0.5])
            .unwrap();
        let g = GridState::from_gaussian(&st, GridConfig::default()).unwrap();
        let w = wigner_samples(&g).unwrap();
        let (a, _) =
            w.values.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let (uq, up) = (w.coord(a / w.m), w.coord(a % w.m));
        assert!((uq - 1.0).abs() <= w.du && (up + 0.5).abs() <= w.du);
    }

    #[test]
    fn cat_wigner_nonnegative() {
        let g = GridState::from_gaussian_mixture(&cat(), GridConfig::default()).unwrap();
        let w = wigner_samples(&g).unwrap();
        assert!(w.nonnegative);
    }

    #[test]
    fn bad_weights_and_small_grids() {
        let vac = GaussianState::vacuum(1);
        assert!(matches!(
            GridState::from_gaussian_mixture(&[(0.7, vac.clone())], GridConfig::default()),
            Err(Error::BadWeights(_))
        ));
        let small = GridConfig::new(3.0, 64).unwrap();
        assert!(matches!(
            GridState::from_gaussian(&vac, small),
            Err(Error::GridTooSmall(_))
        ));
    }

    #[test]
    fn unconverged_quadrature_is_reported() {
        // a coarse grid for a narrow characteristic function
        let st = GaussianState::thermal(1, 6.0);
        let g = GridState::from_gaussian(&st, GridConfig::new(12.0, 16).unwrap()).unwrap();
        assert!(matches!(
            grid_purity(&g),
            Err(Error::QuadratureUnconverged { .. })
        ));
    }
}
