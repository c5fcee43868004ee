//! Python bindings.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sweepkit as sk;

create_exception!(sweepkit, ConfigError, PyValueError, "Invalid scenario or parameters.");
create_exception!(sweepkit, SweepError, PyRuntimeError, "A solve, bound or certification step failed.");

fn to_py(e: sk::Error) -> PyErr {
    if e.is_config_error() {
        ConfigError::new_err(e.to_string())
    } else {
        SweepError::new_err(e.to_string())
    }
}

fn vector(coords: Vec<f64>) -> PyResult<sk::Vector> {
    sk::Vector::new(coords).map_err(to_py)
}

/// A closed prox-regular set (one slice C(t) of a moving family).
#[pyclass(name = "ProxSet", module = "sweepkit", frozen)]
struct PyProxSet(sk::ProxSet);

#[pymethods]
impl PyProxSet {
    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(Self(sk::ProxSet::ball(vector(center)?, radius).map_err(to_py)?))
    }

    #[staticmethod]
    fn half_space(normal: Vec<f64>, offset: f64) -> PyResult<Self> {
        Ok(Self(sk::ProxSet::half_space(vector(normal)?, offset).map_err(to_py)?))
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        Ok(Self(sk::ProxSet::axis_box(vector(lo)?, vector(hi)?).map_err(to_py)?))
    }

    #[staticmethod]
    fn ball_complement(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(Self(sk::ProxSet::ball_complement(vector(center)?, radius).map_err(to_py)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Prox-regularity radius; `inf` for convex sets.
    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }

    fn contains(&self, y: Vec<f64>) -> PyResult<bool> {
        self.0.contains(&vector(y)?).map_err(to_py)
    }

    fn distance(&self, y: Vec<f64>) -> PyResult<f64> {
        self.0.distance(&vector(y)?).map_err(to_py)
    }

    fn project(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.project(&vector(y)?).map_err(to_py)?.coords().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("ProxSet(dim={}, r={})", self.0.dim(), self.0.r())
    }
}

/// A parsed scenario: moving family, start point, schedule and checks.
#[pyclass(name = "Scenario", module = "sweepkit", frozen)]
struct PyScenario(sk::Scenario);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Self(sk::builtin(name).map_err(to_py)?))
    }

    /// A file path or builtin name.
    #[staticmethod]
    fn load(arg: &str) -> PyResult<Self> {
        Ok(Self(sk::load_scenario(arg).map_err(to_py)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(sk::parse_scenario(text).map_err(to_py)?))
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon
    }

    #[getter]
    fn y0(&self) -> Vec<f64> {
        self.0.y0.coords().to_vec()
    }

    #[getter]
    fn checks(&self) -> Vec<String> {
        self.0.checks.iter().map(|c| c.name().to_string()).collect()
    }

    fn slice(&self, t: f64) -> PyResult<PyProxSet> {
        Ok(PyProxSet(self.0.family.slice(t).map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?}, dim={}, horizon={})", self.0.name, self.0.dim, self.0.horizon)
    }
}

/// Catching-up iterates on one time grid.
#[pyclass(name = "Trajectory", module = "sweepkit", frozen)]
struct PyTrajectory(sk::DiscreteTrajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn level(&self) -> usize {
        self.0.level()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps_level()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().iter().map(|p| p.coords().to_vec()).collect()
    }

    #[getter]
    fn jump_norms(&self) -> Vec<f64> {
        self.0.jumps().iter().map(|j| j.norm()).collect()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.0.residuals().to_vec()
    }

    fn variation(&self, start: f64, end: f64) -> PyResult<f64> {
        sk::variation(&self.0, start, end).map_err(to_py)
    }

    /// Step interpolant (value of the last node at or before `t`).
    fn at(&self, t: f64) -> PyResult<Vec<f64>> {
        Ok(self.0.step_interpolant().eval(t).map_err(to_py)?.coords().to_vec())
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn __len__(&self) -> usize {
        self.0.times().len()
    }
}

/// Result of a full run.
#[pyclass(name = "RunReport", module = "sweepkit", frozen)]
struct PyRunReport(sk::RunReport);

#[pymethods]
impl PyRunReport {
    #[getter]
    fn all_passed(&self) -> bool {
        self.0.all_passed()
    }

    /// `(check, passed, margin, detail)` per enabled check.
    #[getter]
    fn verdicts(&self) -> Vec<(String, bool, f64, String)> {
        self.0
            .checks
            .iter()
            .map(|v| (v.check.clone(), v.passed, v.margin, v.detail.clone()))
            .collect()
    }

    #[getter]
    fn variations(&self) -> Vec<f64> {
        self.0.levels.iter().map(|l| l.variation).collect()
    }

    #[getter]
    fn sup_diffs(&self) -> Vec<f64> {
        self.0.convergence.sup_diffs.clone()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

#[pyfunction]
fn list_builtins() -> Vec<(String, String)> {
    sk::list_builtins()
}

/// Solves level `level` of the scenario's refinement schedule.
#[pyfunction]
fn solve(py: Python<'_>, scenario: &PyScenario, level: usize) -> PyResult<PyTrajectory> {
    let s = &scenario.0;
    py.detach(|| {
        let schedule = sk::run::schedule_for(s, Some(level + 1))?;
        sk::solve_level(&s.family, &s.y0, &schedule, level)
    })
    .map(PyTrajectory)
    .map_err(to_py)
}

/// Runs every level and check; writes artifacts when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (scenario, out_dir=None, levels=None, seed=None, svg=false))]
fn run(
    py: Python<'_>,
    scenario: &PyScenario,
    out_dir: Option<PathBuf>,
    levels: Option<usize>,
    seed: Option<u64>,
    svg: bool,
) -> PyResult<PyRunReport> {
    let opts = sk::RunOptions { levels, seed, svg };
    py.detach(|| sk::run(&scenario.0, out_dir.as_deref(), &opts))
        .map(|o| PyRunReport(o.report))
        .map_err(to_py)
}

/// Convergence table as a JSON string.
#[pyfunction]
#[pyo3(signature = (scenario, levels=None))]
fn converge(py: Python<'_>, scenario: &PyScenario, levels: Option<usize>) -> PyResult<String> {
    let s = &scenario.0;
    py.detach(|| {
        let schedule = sk::run::schedule_for(s, levels)?;
        sk::converge_study(&s.family, &s.y0, &schedule).map(|(rep, _)| rep.to_json())
    })
    .map_err(to_py)
}

/// Excess e(A, B) = sup_{a in A} d(a, B): exact for analytic pairs, a
/// sampled lower bound otherwise.  Returns `(value, exact)`.
#[pyfunction]
#[pyo3(signature = (a, b, samples=None, seed=None))]
fn excess(a: &PyProxSet, b: &PyProxSet, samples: Option<usize>, seed: Option<u64>) -> PyResult<(f64, bool)> {
    let mut budget = sk::SamplingParams::default();
    if let Some(n) = samples {
        budget.samples = n;
    }
    if let Some(s) = seed {
        budget.seed = s;
    }
    let est = sk::excess(&a.0, &b.0, &budget).map_err(to_py)?;
    Ok((est.lower, matches!(est.method, sk::ExcessMethod::Analytic)))
}

/// Variation bound for a start point outside an inner ball B(w, rho).
#[pyfunction]
fn ball_bound(r: f64, w: Vec<f64>, rho: f64, y0: Vec<f64>, eps_sup: f64) -> PyResult<f64> {
    let p = sk::BallBoundParams::with_eps(r, vector(w)?, rho, vector(y0)?, eps_sup);
    sk::ball_variation_bound(&p).map(|b| b.value).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "sweepkit")]
fn sweepkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProxSet>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyRunReport>()?;
    m.add_function(wrap_pyfunction!(list_builtins, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    m.add_function(wrap_pyfunction!(excess, m)?)?;
    m.add_function(wrap_pyfunction!(ball_bound, m)?)?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("SweepError", m.py().get_type::<SweepError>())?;
    Ok(())
}
