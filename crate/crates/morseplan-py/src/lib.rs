//! Python bindings. Results cross the boundary as JSON and come out as
//! plain dicts and lists on the Python side.

use std::sync::RwLock;

use morseplan::config::EngineConfig;
use morseplan::diagnostics::diagnose;
use morseplan::mc_oracle::{simulate, Coordinate, SimConfig};
use morseplan::spectral::SpectralSolver;
use morseplan::surface::{build_surface, extract_frontiers, fit_spline, solve_u0, BicubicInterpolant};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};

/// Rust-side engine behind the Python `Planner`.
pub struct Engine {
    config: EngineConfig,
    solver: SpectralSolver,
    interp: RwLock<Option<BicubicInterpolant>>,
}

fn err(e: morseplan::Error) -> String {
    e.to_string()
}

impl Engine {
    pub fn new(config_json: &str) -> Result<Self, String> {
        let config = EngineConfig::from_json(config_json).map_err(err)?;
        let solver = config.spectral_solver().map_err(err)?;
        Ok(Self {
            config,
            solver,
            interp: RwLock::new(None),
        })
    }

    pub fn probability(&self, u0: f64, xi: f64) -> Result<Value, String> {
        let q = self.solver.query(u0, xi).map_err(err)?;
        Ok(json!({
            "u0": u0, "xi": xi, "y0": q.point.y0, "y_hat": q.point.y_hat,
            "p": q.probability.clamped, "raw": q.probability.raw, "flagged": q.probability.flagged,
        }))
    }

    /// Builds the surface and keeps its interpolant; returns the node matrix.
    pub fn build_surface(&self) -> Result<Value, String> {
        let grid = self.config.grid().map_err(err)?;
        let surface = build_surface(&self.solver, &grid).map_err(err)?;
        let interp = fit_spline(&surface, self.config.solver.spline).map_err(err)?;
        *self.interp.write().unwrap() = Some(interp);
        serde_json::to_value(&surface).map_err(|e| e.to_string())
    }

    fn with_interp<T>(&self, f: impl FnOnce(&BicubicInterpolant) -> Result<T, String>) -> Result<T, String> {
        match self.interp.read().unwrap().as_ref() {
            Some(i) => f(i),
            None => Err("surface not built; call build_surface first".into()),
        }
    }

    pub fn frontiers(&self, levels: Option<Vec<f64>>) -> Result<Value, String> {
        let levels = levels.unwrap_or_else(|| self.config.plan.confidence_levels.clone());
        self.with_interp(|i| {
            let set = extract_frontiers(i, &levels, self.config.frontier_options());
            serde_json::to_value(&set).map_err(|e| e.to_string())
        })
    }

    pub fn solve_u0(&self, xi: f64, alpha: f64) -> Result<Value, String> {
        let hbar = self.config.market.sigma().powi(2);
        self.with_interp(|i| {
            let r = solve_u0(i, &self.config.plan, hbar, xi, alpha).map_err(err)?;
            serde_json::to_value(r).map_err(|e| e.to_string())
        })
    }

    pub fn monte_carlo(&self, u0: f64, xi: f64, sim: SimConfig) -> Result<Value, String> {
        let e = simulate(&self.config.plan, &self.config.market, u0, xi, &sim).map_err(err)?;
        serde_json::to_value(e).map_err(|e| e.to_string())
    }

    pub fn diagnose(&self, u0: f64, xi: f64) -> Result<Value, String> {
        let r = diagnose(&self.solver, u0, xi).map_err(err)?;
        serde_json::to_value(r).map_err(|e| e.to_string())
    }
}

fn to_py(py: Python<'_>, v: Result<Value, String>) -> PyResult<Py<PyAny>> {
    let v = v.map_err(PyValueError::new_err)?;
    let text = serde_json::to_string(&v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Planning engine for one plan/market/solver configuration (JSON text).
#[pyclass(name = "Planner")]
struct PyPlanner {
    inner: Engine,
}

#[pymethods]
impl PyPlanner {
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        Engine::new(config_json)
            .map(|inner| Self { inner })
            .map_err(PyValueError::new_err)
    }

    /// Spectral tail probability P[Π_T < Π̂] at one control.
    fn probability(&self, py: Python<'_>, u0: f64, xi: f64) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| self.inner.probability(u0, xi));
        to_py(py, r)
    }

    fn build_surface(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| self.inner.build_surface());
        to_py(py, r)
    }

    #[pyo3(signature = (levels=None))]
    fn frontiers(&self, py: Python<'_>, levels: Option<Vec<f64>>) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| self.inner.frontiers(levels));
        to_py(py, r)
    }

    fn solve_u0(&self, py: Python<'_>, xi: f64, alpha: f64) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| self.inner.solve_u0(xi, alpha));
        to_py(py, r)
    }

    #[pyo3(signature = (u0, xi, n_paths=200_000, seed=0, steps_per_year=252, coordinate="wealth"))]
    fn monte_carlo(
        &self,
        py: Python<'_>,
        u0: f64,
        xi: f64,
        n_paths: usize,
        seed: u64,
        steps_per_year: usize,
        coordinate: &str,
    ) -> PyResult<Py<PyAny>> {
        let coordinate = match coordinate {
            "wealth" => Coordinate::Wealth,
            "verhulst" => Coordinate::Verhulst,
            other => return Err(PyValueError::new_err(format!("unknown coordinate {other}"))),
        };
        let sim = SimConfig {
            n_paths,
            steps_per_year,
            seed,
            coordinate,
            ..Default::default()
        };
        let r = py.detach(|| self.inner.monte_carlo(u0, xi, sim));
        to_py(py, r)
    }

    fn diagnose(&self, py: Python<'_>, u0: f64, xi: f64) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| self.inner.diagnose(u0, xi));
        to_py(py, r)
    }

    fn config_hash(&self) -> String {
        self.inner.config.hash()
    }
}

#[pymodule]
fn morseplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", morseplan::ENGINE_VERSION)?;
    m.add_class::<PyPlanner>()?;
    Ok(())
}
