//! Python bindings: Gaussian states, their functionals, the flow, grid
//! purity of one-mode mixtures and the verifier sweeps.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qdiff::functionals as f;
use qdiff::grid::{grid_dirichlet, grid_purity, GridConfig, GridState};
use qdiff::verify::{self, TheoremId};
use qdiff::{Error, RunConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::QuadratureUnconverged { .. }
        | Error::StepTooSmall(_)
        | Error::NumericalFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A Gaussian state in quadrature ordering `(q1, p1, ..., qn, pn)`.
#[pyclass(name = "GaussianState", module = "qdiff_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyGaussianState {
    inner: qdiff::GaussianState,
}

impl From<qdiff::GaussianState> for PyGaussianState {
    fn from(inner: qdiff::GaussianState) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyGaussianState {
    #[new]
    fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> PyResult<Self> {
        let d = mean.len();
        if cov.len() != d || cov.iter().any(|row| row.len() != d) {
            return Err(PyValueError::new_err(format!(
                "covariance must be {d} x {d}"
            )));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
        let st = qdiff::GaussianState::new(DVector::from_vec(mean), cov).map_err(to_py)?;
        st.validate().map_err(to_py)?;
        Ok(st.into())
    }

    #[staticmethod]
    fn vacuum(n: usize) -> Self {
        qdiff::GaussianState::vacuum(n).into()
    }

    #[staticmethod]
    fn thermal(n: usize, nu: f64) -> Self {
        qdiff::GaussianState::thermal(n, nu).into()
    }

    #[staticmethod]
    fn coherent(q: f64, p: f64) -> Self {
        qdiff::GaussianState::coherent(q, p).into()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean().iter().copied().collect()
    }

    #[getter]
    fn cov(&self) -> Vec<Vec<f64>> {
        let c = self.inner.cov();
        c.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn symplectic_eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.williamson().map_err(to_py)?.nu)
    }

    /// The state after time `t` of the diffusion flow.
    fn evolve(&self, t: f64) -> PyResult<Self> {
        Ok(qdiff::semigroup::evolve_gaussian(&self.inner, t)
            .map_err(to_py)?
            .into())
    }

    fn displace(&self, z: Vec<f64>) -> PyResult<Self> {
        Ok(self.inner.displace(&z).map_err(to_py)?.into())
    }

    fn tensor(&self, other: &Self) -> Self {
        self.inner.tensor(&other.inner).into()
    }

    fn entropy(&self) -> PyResult<f64> {
        f::entropy(&self.inner).map_err(to_py)
    }

    fn purity(&self) -> PyResult<f64> {
        f::purity(&self.inner).map_err(to_py)
    }

    fn entropy_power(&self) -> PyResult<f64> {
        f::entropy_power(&self.inner).map_err(to_py)
    }

    fn fisher_j(&self) -> PyResult<f64> {
        f::fisher_j(&self.inner).map_err(to_py)
    }

    fn dirichlet(&self) -> PyResult<f64> {
        f::dirichlet_form(&self.inner).map_err(to_py)
    }

    fn overlap(&self, other: &Self) -> PyResult<f64> {
        f::hs_overlap(&self.inner, &other.inner).map_err(to_py)
    }

    fn relative_entropy(&self, reference: &Self) -> PyResult<f64> {
        f::relative_entropy(&self.inner, &reference.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "GaussianState(mean={:?}, cov={:?})",
            self.mean(),
            self.cov()
        )
    }
}

fn grid_of(components: Vec<(f64, PyGaussianState)>, extent: f64, m: usize) -> PyResult<GridState> {
    let parts: Vec<_> = components.into_iter().map(|(w, s)| (w, s.inner)).collect();
    let cfg = GridConfig::new(extent, m).map_err(to_py)?;
    GridState::from_gaussian_mixture(&parts, cfg).map_err(to_py)
}

/// `(purity, dirichlet)` of a one-mode mixture `[(weight, state), ...]`
/// after time `t`, on a grid of half-width `extent` with `m` points per axis.
#[pyfunction]
#[pyo3(signature = (components, t = 0.0, extent = 12.0, m = 256))]
fn grid_functionals(
    components: Vec<(f64, PyGaussianState)>,
    t: f64,
    extent: f64,
    m: usize,
) -> PyResult<(f64, f64)> {
    let g = grid_of(components, extent, m)?.evolve(t).map_err(to_py)?;
    Ok((
        grid_purity(&g).map_err(to_py)?,
        grid_dirichlet(&g).map_err(to_py)?,
    ))
}

#[pyfunction]
fn nash_constant(n: usize) -> f64 {
    verify::derived_nash_constant(n)
}

/// Summary of one verifier on its default seeded corpus.
#[pyclass(module = "qdiff_py", frozen, get_all)]
struct VerificationSummary {
    theorem: String,
    passed: bool,
    records: usize,
    hard_failures: usize,
    soft_failures: usize,
    worst_margin: Option<f64>,
    extras: BTreeMap<String, f64>,
}

#[pymethods]
impl VerificationSummary {
    fn __repr__(&self) -> String {
        format!(
            "VerificationSummary(theorem={:?}, passed={}, records={})",
            self.theorem, self.passed, self.records
        )
    }
}

/// Runs the verifier named by `tag` (for example `"nash"`), releasing the GIL.
#[pyfunction]
#[pyo3(signature = (tag, seed = 42))]
fn run_verifier(py: Python<'_>, tag: &str, seed: u64) -> PyResult<VerificationSummary> {
    let theorem: TheoremId = tag.parse().map_err(to_py)?;
    let cfg = RunConfig {
        seed,
        ..Default::default()
    };
    let report = py.detach(|| verify::run(theorem, &cfg)).map_err(to_py)?;
    let s = report.summary;
    Ok(VerificationSummary {
        theorem: theorem.tag().to_string(),
        passed: s.passed,
        records: s.records,
        hard_failures: s.hard_failures,
        soft_failures: s.soft_failures,
        worst_margin: s.worst_margin,
        extras: s.extras,
    })
}

#[pyfunction]
fn verifier_tags() -> Vec<&'static str> {
    TheoremId::ALL.iter().map(|t| t.tag()).collect()
}

#[pymodule]
fn qdiff_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianState>()?;
    m.add_class::<VerificationSummary>()?;
    m.add_function(wrap_pyfunction!(grid_functionals, m)?)?;
    m.add_function(wrap_pyfunction!(nash_constant, m)?)?;
    m.add_function(wrap_pyfunction!(run_verifier, m)?)?;
    m.add_function(wrap_pyfunction!(verifier_tags, m)?)?;
    Ok(())
}
