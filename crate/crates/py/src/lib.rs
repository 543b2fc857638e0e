//! Python module `dcs_synth`.

use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use synth::aco::{AcoParams, HeuristicMode};
use synth::oracle::{ExactLimits, ExactOutcome};
use synth::render::TreeFormat;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A problem instance plus the solver parameters read with it.
#[pyclass(name = "Instance", module = "dcs_synth", from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: synth::ProblemInstance,
    params: AcoParams,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (inner, params) = synth::io::parse_instance(text).map_err(value_error)?;
        Ok(Self { inner, params })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_error)?;
        Self::from_json(&text)
    }

    /// One of the instances shipped with the library, by file name.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        let text = synth::bundled::lookup(name).ok_or_else(|| value_error(format!("no bundled instance `{name}`")))?;
        Self::from_json(text)
    }

    fn to_json(&self) -> String {
        synth::io::render_instance(&self.inner, &self.params)
    }

    #[getter]
    fn levels(&self) -> u32 {
        self.inner.levels
    }

    #[getter]
    fn num_loops(&self) -> usize {
        self.inner.num_loops()
    }

    #[getter]
    fn t_max(&self) -> f64 {
        self.inner.t_max
    }

    #[getter]
    fn p_max(&self) -> f64 {
        self.inner.p_max
    }

    #[getter]
    fn device_ids(&self) -> Vec<String> {
        self.inner.device_types.iter().map(|d| d.id.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(levels={}, types={}, loops={})",
            self.inner.levels,
            self.inner.num_types(),
            self.inner.num_loops()
        )
    }
}

/// A placed design, tied to the instance it was built for.
#[pyclass(name = "Architecture", module = "dcs_synth", from_py_object)]
#[derive(Clone)]
struct PyArchitecture {
    inner: synth::Architecture,
    instance: synth::ProblemInstance,
}

#[pymethods]
impl PyArchitecture {
    #[staticmethod]
    fn from_json(text: &str, instance: &PyInstance) -> PyResult<Self> {
        let inner = synth::io::parse_architecture(text, &instance.inner).map_err(value_error)?;
        Ok(Self {
            inner,
            instance: instance.inner.clone(),
        })
    }

    fn to_json(&self) -> String {
        synth::io::render_architecture(&self.inner, &self.instance)
    }

    /// `"text"` or `"dot"`.
    #[pyo3(signature = (format = "text"))]
    fn render(&self, format: &str) -> PyResult<String> {
        let f = match format {
            "text" => TreeFormat::Text,
            "dot" => TreeFormat::Dot,
            other => return Err(value_error(format!("unknown format `{other}`"))),
        };
        Ok(synth::render::render_tree(&self.inner, &self.instance, f))
    }

    #[getter]
    fn cost(&self) -> f64 {
        synth::feasibility::total_cost(&self.inner, &self.instance)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Report", module = "dcs_synth", get_all)]
struct PyReport {
    feasible: bool,
    total_cost: f64,
    worst_loop_time: f64,
    system_fail_prob: f64,
    /// Names of the violated constraint families.
    violations: Vec<String>,
}

#[pyclass(name = "SolveResult", module = "dcs_synth", get_all)]
struct PySolveResult {
    feasible: bool,
    best_cost: Option<f64>,
    architecture: Option<PyArchitecture>,
    wall_time: f64,
    /// Convergence trace as CSV text.
    trace_csv: String,
}

fn params(
    inst: &PyInstance,
    seed: Option<u64>,
    ants: Option<u32>,
    iterations: Option<u32>,
    heuristic: Option<&str>,
) -> PyResult<AcoParams> {
    let mut p = inst.params.clone();
    if let Some(s) = seed {
        p.seed = s;
    }
    if let Some(a) = ants {
        p.ants = a;
    }
    if let Some(i) = iterations {
        p.iterations = i;
    }
    match heuristic {
        None => {}
        Some("inverse_cost") => p.heuristic = HeuristicMode::InverseCost,
        Some("channels_per_cost") => p.heuristic = HeuristicMode::ChannelsPerCost,
        Some(other) => return Err(value_error(format!("unknown heuristic `{other}`"))),
    }
    p.validate().map_err(value_error)?;
    Ok(p)
}

fn wrap(res: synth::SolveResult, inst: &PyInstance) -> PySolveResult {
    PySolveResult {
        feasible: res.feasible,
        best_cost: res.best_cost,
        trace_csv: synth::io::export_convergence(&res.trace),
        architecture: res.best_architecture.map(|inner| PyArchitecture {
            inner,
            instance: inst.inner.clone(),
        }),
        wall_time: res.wall_time,
    }
}

/// Runs the ant colony. Unset arguments come from the instance file.
#[pyfunction]
#[pyo3(signature = (instance, seed = None, ants = None, iterations = None, heuristic = None))]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    seed: Option<u64>,
    ants: Option<u32>,
    iterations: Option<u32>,
    heuristic: Option<&str>,
) -> PyResult<PySolveResult> {
    let p = params(instance, seed, ants, iterations, heuristic)?;
    let res = py.detach(|| synth::solve(&instance.inner, &p));
    Ok(wrap(res, instance))
}

/// Random search with the colony's budget.
#[pyfunction]
#[pyo3(signature = (instance, seed = None, ants = None, iterations = None))]
fn baseline(
    py: Python<'_>,
    instance: &PyInstance,
    seed: Option<u64>,
    ants: Option<u32>,
    iterations: Option<u32>,
) -> PyResult<PySolveResult> {
    let p = params(instance, seed, ants, iterations, None)?;
    let res = py.detach(|| synth::solve_random_baseline(&instance.inner, &p));
    Ok(wrap(res, instance))
}

/// Exact optimum. Returns `(status, cost, architecture)` with status one of
/// `"optimal"`, `"infeasible"`, `"budget_exceeded"`.
#[pyfunction]
#[pyo3(signature = (instance, max_nodes = 64, time_budget = 60.0))]
fn exact(
    py: Python<'_>,
    instance: &PyInstance,
    max_nodes: u32,
    time_budget: f64,
) -> PyResult<(&'static str, Option<f64>, Option<PyArchitecture>)> {
    if !(time_budget.is_finite() && time_budget >= 0.0) {
        return Err(value_error("time_budget must be a non-negative number of seconds"));
    }
    let limits = ExactLimits {
        max_nodes,
        time_budget: Duration::from_secs_f64(time_budget),
        ..ExactLimits::default()
    };
    let out = py.detach(|| synth::oracle::exact_solve(&instance.inner, &limits));
    Ok(match out {
        ExactOutcome::Optimal { architecture, cost } => (
            "optimal",
            Some(cost),
            Some(PyArchitecture {
                inner: architecture,
                instance: instance.inner.clone(),
            }),
        ),
        ExactOutcome::Infeasible => ("infeasible", None, None),
        ExactOutcome::BudgetExceeded => ("budget_exceeded", None, None),
    })
}

#[pyfunction]
fn validate(instance: &PyInstance, architecture: &PyArchitecture) -> PyReport {
    let r = synth::validate(&architecture.inner, &instance.inner);
    PyReport {
        feasible: r.is_feasible(),
        total_cost: r.total_cost,
        worst_loop_time: r.worst_loop_time,
        system_fail_prob: r.system_fail_prob,
        violations: r.families().iter().map(|f| f.to_string()).collect(),
    }
}

/// Repeated runs with seeds base, base+1, ...; returns `(stats_csv, runs_csv)`.
#[pyfunction]
#[pyo3(signature = (instance, runs, seed = None))]
fn batch(py: Python<'_>, instance: &PyInstance, runs: u32, seed: Option<u64>) -> PyResult<(String, String)> {
    if runs == 0 {
        return Err(value_error("runs must be at least 1"));
    }
    let p = params(instance, seed, None, None, None)?;
    let b = py.detach(|| synth::batch::run_batch(&instance.inner, &p, runs));
    Ok((synth::batch::stats_csv(&b.stats), synth::batch::runs_csv(&b.records)))
}

#[pyfunction]
fn bundled_instances() -> Vec<&'static str> {
    synth::bundled::names().collect()
}

#[pymodule]
fn dcs_synth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyArchitecture>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(batch, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_instances, m)?)?;
    Ok(())
}
