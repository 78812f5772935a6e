//! Python module `phaseseg`: convex graphs, stop/play, the scalar inclusion,
//! 1-D runs and the sampled assumption checks.

use phaseseg::convexgraph::{ConvexGraph, Interval};
use phaseseg::diagnostics::TRACE_COLUMNS;
use phaseseg::grid::{Field, Grid};
use phaseseg::hysteresis::{self, PwlInput};
use phaseseg::initdata::InitialData;
use phaseseg::limit_solver;
use phaseseg::model::{self, ModelSpec};
use phaseseg::sigma_solver::{self, RunOutput, SolverConfig};
use phaseseg::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Solver { .. } | Error::StepFailure { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Maximal monotone graph `beta = d f1`.
#[pyclass(name = "ConvexGraph", module = "phaseseg", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyConvexGraph {
    inner: ConvexGraph,
}

impl PyConvexGraph {
    fn checked(inner: ConvexGraph) -> PyResult<Self> {
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }
}

#[pymethods]
impl PyConvexGraph {
    #[staticmethod]
    #[pyo3(signature = (lo = 0.0, hi = 1.0))]
    fn indicator(lo: f64, hi: f64) -> PyResult<Self> {
        Self::checked(ConvexGraph::Indicator { lo, hi })
    }

    #[staticmethod]
    #[pyo3(signature = (c, lo = 0.0, hi = 1.0))]
    fn log_potential(c: f64, lo: f64, hi: f64) -> PyResult<Self> {
        Self::checked(ConvexGraph::LogPotential { c, lo, hi })
    }

    #[staticmethod]
    fn power(p: f64) -> PyResult<Self> {
        Self::checked(ConvexGraph::Power { p })
    }

    #[staticmethod]
    fn zero() -> Self {
        Self { inner: ConvexGraph::Zero }
    }

    /// `(I + lam beta)^{-1}(r)`.
    fn resolvent(&self, r: f64, lam: f64) -> PyResult<f64> {
        self.inner.resolvent(r, lam).map_err(py_err)
    }

    fn resolvent_derivative(&self, r: f64, lam: f64) -> PyResult<f64> {
        self.inner.resolvent_derivative(r, lam).map_err(py_err)
    }

    fn yosida(&self, r: f64, lam: f64) -> PyResult<f64> {
        self.inner.yosida(r, lam).map_err(py_err)
    }

    /// Element of least modulus of `beta(r)`, `None` outside the domain.
    fn min_section(&self, r: f64) -> Option<f64> {
        self.inner.min_section(r)
    }

    fn f1(&self, r: f64) -> f64 {
        self.inner.f1_value(r)
    }

    fn contains(&self, r: f64, xi: f64) -> bool {
        self.inner.contains(r, xi)
    }

    fn __repr__(&self) -> String {
        format!("ConvexGraph({:?})", self.inner)
    }
}

/// Nonlinearity bundle, built from the TOML body of a `[model]` section.
#[pyclass(name = "Model", module = "phaseseg", frozen)]
pub struct PyModel {
    inner: ModelSpec,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner: ModelSpec = toml::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn graph(&self) -> PyConvexGraph {
        PyConvexGraph { inner: self.inner.graph }
    }

    fn g(&self, r: f64) -> f64 {
        self.inner.g(r)
    }

    fn dg(&self, r: f64) -> f64 {
        self.inner.dg(r)
    }

    fn pi(&self, r: f64) -> f64 {
        self.inner.pi(r)
    }

    fn kappa(&self, m: f64, r: f64) -> f64 {
        self.inner.kappa(m, r)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.inner)
    }
}

/// Sampled assumption checks: `(passed, report text, failed check names)`.
#[pyfunction]
#[pyo3(signature = (model, density = 101))]
fn verify_assumptions(model: &PyModel, density: usize) -> PyResult<(bool, String, Vec<String>)> {
    let report = model::verify_assumptions(&model.inner, density).map_err(py_err)?;
    let failed = report.failures().map(|c| c.name.to_string()).collect();
    Ok((report.passed(), report.to_string(), failed))
}

fn pwl(t: Vec<f64>, w: Vec<f64>) -> PyResult<PwlInput> {
    PwlInput::new(t, w).map_err(py_err)
}

/// Stop operator on `[lo, hi]` at the input nodes.
#[pyfunction]
#[pyo3(signature = (t, w, rho0, lo = 0.0, hi = 1.0))]
fn stop(t: Vec<f64>, w: Vec<f64>, rho0: f64, lo: f64, hi: f64) -> PyResult<Vec<f64>> {
    Ok(hysteresis::stop(&pwl(t, w)?, rho0, Interval::closed(lo, hi)).map_err(py_err)?.w)
}

/// Stop operator with the obstacle contact times inserted: `(t, rho)`.
#[pyfunction]
#[pyo3(signature = (t, w, rho0, lo = 0.0, hi = 1.0))]
fn stop_refined(t: Vec<f64>, w: Vec<f64>, rho0: f64, lo: f64, hi: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let out = hysteresis::stop_refined(&pwl(t, w)?, rho0, Interval::closed(lo, hi)).map_err(py_err)?;
    Ok((out.t, out.w))
}

#[pyfunction]
#[pyo3(signature = (t, w, rho0, lo = 0.0, hi = 1.0))]
fn play(t: Vec<f64>, w: Vec<f64>, rho0: f64, lo: f64, hi: f64) -> PyResult<Vec<f64>> {
    Ok(hysteresis::play(&pwl(t, w)?, rho0, Interval::closed(lo, hi)).map_err(py_err)?.w)
}

/// Scalar inclusion driven by `mu_path` on the uniform mesh of step `tau`.
#[pyfunction]
fn scalar_inclusion<'py>(
    py: Python<'py>,
    model: &PyModel,
    mu_path: Vec<f64>,
    rho0: f64,
    tau: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let path = limit_solver::scalar_inclusion_solve(&mu_path, rho0, &model.inner, tau).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("t", path.times)?;
    d.set_item("rho", path.rho)?;
    d.set_item("xi", path.xi)?;
    Ok(d)
}

fn run_output<'py>(py: Python<'py>, out: RunOutput) -> PyResult<Bound<'py, PyDict>> {
    let columns = PyDict::new(py);
    for (i, name) in TRACE_COLUMNS.iter().enumerate() {
        columns.set_item(*name, out.trace.rows.iter().map(|r| r.values()[i]).collect::<Vec<f64>>())?;
    }
    let d = PyDict::new(py);
    d.set_item("trace", columns)?;
    d.set_item("t", out.state.t)?;
    d.set_item("mu", out.state.mu.into_vec())?;
    d.set_item("rho", out.state.rho.into_vec())?;
    d.set_item("xi", out.state.xi.into_vec())?;
    d.set_item("steps", out.trace.steps)?;
    d.set_item("halvings", out.trace.halvings)?;
    Ok(d)
}

/// 1-D run on `len(mu0)` cells of `(0, length)`; `sigma=None` runs the limit problem.
#[pyfunction]
#[pyo3(signature = (model, mu0, rho0, tau, t_final, sigma = None, length = 1.0, stride = 1))]
#[allow(clippy::too_many_arguments)]
fn run_1d<'py>(
    py: Python<'py>,
    model: &PyModel,
    mu0: Vec<f64>,
    rho0: Vec<f64>,
    tau: f64,
    t_final: f64,
    sigma: Option<f64>,
    length: f64,
    stride: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = Grid::new_1d(mu0.len(), length).map_err(py_err)?;
    let spec = &model.inner;
    let init = InitialData::new(&grid, &spec.graph, Field::from_vec(mu0), Field::from_vec(rho0)).map_err(py_err)?;
    let cfg = SolverConfig::new(tau, t_final, sigma.unwrap_or(0.0)).with_stride(stride);
    let result = py.detach(|| match sigma {
        Some(_) => sigma_solver::run(&init, &cfg, &grid, spec),
        None => limit_solver::limit_run(&init, &cfg, &grid, spec),
    });
    let out = result.map_err(|a| {
        let msg = format!("step {}: {}", a.step, a.error);
        match a.error {
            Error::Solver { .. } | Error::StepFailure { .. } => PyRuntimeError::new_err(msg),
            _ => PyValueError::new_err(msg),
        }
    })?;
    run_output(py, out)
}

#[pymodule]
#[pyo3(name = "phaseseg")]
pub fn phaseseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConvexGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(verify_assumptions, m)?)?;
    m.add_function(wrap_pyfunction!(stop, m)?)?;
    m.add_function(wrap_pyfunction!(stop_refined, m)?)?;
    m.add_function(wrap_pyfunction!(play, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_inclusion, m)?)?;
    m.add_function(wrap_pyfunction!(run_1d, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
