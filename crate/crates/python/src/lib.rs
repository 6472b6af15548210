//! Python bindings. Costs cross the boundary as `fractions.Fraction`; any
//! value `Fraction()` accepts (int, str, float, Decimal) is taken as input.
//! Item indices are 0-based.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use robsel_core::bench::{run_experiment, summary_csv, ExperimentConfig};
use robsel_core::formulations::solve_formulation;
use robsel_core::hiro::{self, HiroConfig, HiroMode};
use robsel_core::io::{self, Layout, SetKind};
use robsel_core::milp::SolverConfig;
use robsel_core::model::{
    self, BruteForceLimits, BudgetMode, CostVector, Criterion, DeltaSemantics, ProblemInstance, SelectionSolution,
    SolutionRole, UncertaintySet, WitnessKind,
};
use robsel_core::rational::{self, Rational};
use robsel_core::samplers::{self, GeneratorId, ShapeParams};
use robsel_core::Error;
use std::path::PathBuf;
use std::time::Duration;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Solver(_) | Error::OracleMismatch(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_rational(v: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let frac = v.py().import("fractions")?.getattr("Fraction")?.call1((v,))?;
    let s: String = frac.str()?.extract()?;
    rational::parse(&s).ok_or_else(|| PyValueError::new_err(format!("not a rational: {s}")))
}

fn to_fraction<'py>(py: Python<'py>, v: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((rational::format(v),))
}

fn to_costs(v: &Bound<'_, PyAny>) -> PyResult<CostVector> {
    let entries = v.try_iter()?.map(|x| to_rational(&x?)).collect::<PyResult<Vec<_>>>()?;
    CostVector::new(entries).map_err(py_err)
}

fn cost_list<'py>(py: Python<'py>, c: &CostVector) -> PyResult<Bound<'py, PyList>> {
    let items = c.entries().iter().map(|v| to_fraction(py, v)).collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn named<T>(what: &str, v: &str, f: impl Fn(&str) -> Option<T>) -> PyResult<T> {
    f(v).ok_or_else(|| PyValueError::new_err(format!("unknown {what} {v:?}")))
}

fn secs(v: Option<f64>) -> PyResult<Option<Duration>> {
    v.map(|s| Duration::try_from_secs_f64(s).map_err(|_| PyValueError::new_err(format!("invalid time limit {s}"))))
        .transpose()
}

/// A robust selection instance.
#[pyclass(name = "Instance", module = "robsel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: ProblemInstance,
}

impl PyInstance {
    fn solution(&self, indices: Vec<usize>) -> PyResult<SelectionSolution> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.inner.n) {
            return Err(PyValueError::new_err(format!("index {i} outside 0..{}", self.inner.n)));
        }
        let role = if self.inner.criterion == Criterion::TwoStage {
            SolutionRole::PartialFirstStage
        } else {
            SolutionRole::Full
        };
        Ok(SelectionSolution::from_indices(self.inner.n, &indices, role))
    }
}

#[pymethods]
impl PyInstance {
    /// General constructor. `uncertainty` is a dict with either
    /// `scenarios`, or `lower` and `deviation` plus optional `gamma` and
    /// `budget_mode`.
    #[new]
    #[pyo3(signature = (p, criterion, uncertainty, first_stage=None, delta=None, delta_semantics="KeptAtLeast"))]
    fn new(
        p: usize,
        criterion: &str,
        uncertainty: &Bound<'_, PyDict>,
        first_stage: Option<&Bound<'_, PyAny>>,
        delta: Option<usize>,
        delta_semantics: &str,
    ) -> PyResult<Self> {
        let criterion = named("criterion", criterion, Criterion::from_name)?;
        let set = if let Some(s) = uncertainty.get_item("scenarios")? {
            UncertaintySet::Discrete {
                scenarios: s.try_iter()?.map(|c| to_costs(&c?)).collect::<PyResult<_>>()?,
            }
        } else {
            let get = |k: &str| {
                uncertainty
                    .get_item(k)?
                    .ok_or_else(|| PyValueError::new_err(format!("uncertainty needs {k:?}")))
            };
            let lower = to_costs(&get("lower")?)?;
            let deviation = to_costs(&get("deviation")?)?;
            match uncertainty.get_item("gamma")? {
                None => UncertaintySet::Interval { lower, deviation },
                Some(g) => {
                    let mode: String = get("budget_mode")?.extract()?;
                    UncertaintySet::Budgeted {
                        lower,
                        deviation,
                        gamma: to_rational(&g)?,
                        mode: named("budget mode", &mode, BudgetMode::from_name)?,
                    }
                }
            }
        };
        let first = first_stage.map(to_costs).transpose()?;
        let sem = named("delta semantics", delta_semantics, DeltaSemantics::from_name)?;
        let inner = ProblemInstance::new(p, criterion, set, first, delta.map(|d| (d, sem))).map_err(py_err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn minmax_discrete(p: usize, scenarios: &Bound<'_, PyAny>) -> PyResult<Self> {
        let s = scenarios.try_iter()?.map(|c| to_costs(&c?)).collect::<PyResult<_>>()?;
        Ok(PyInstance {
            inner: ProblemInstance::minmax_discrete(p, s).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn regret_discrete(p: usize, scenarios: &Bound<'_, PyAny>) -> PyResult<Self> {
        let s = scenarios.try_iter()?.map(|c| to_costs(&c?)).collect::<PyResult<_>>()?;
        Ok(PyInstance {
            inner: ProblemInstance::regret_discrete(p, s).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn regret_interval(p: usize, lower: &Bound<'_, PyAny>, deviation: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyInstance {
            inner: ProblemInstance::regret_interval(p, to_costs(lower)?, to_costs(deviation)?).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (p, lower, deviation, gamma, budget_mode="ContinuousItems"))]
    fn minmax_budgeted(
        p: usize,
        lower: &Bound<'_, PyAny>,
        deviation: &Bound<'_, PyAny>,
        gamma: &Bound<'_, PyAny>,
        budget_mode: &str,
    ) -> PyResult<Self> {
        let mode = named("budget mode", budget_mode, BudgetMode::from_name)?;
        let inner = ProblemInstance::minmax_budgeted(p, to_costs(lower)?, to_costs(deviation)?, to_rational(gamma)?, mode)
            .map_err(py_err)?;
        Ok(PyInstance { inner })
    }

    /// Draws an instance from a named generator such as `"MM-D-U"`.
    #[staticmethod]
    #[pyo3(signature = (generator, n, p, seed, N=None, gamma=None, delta=None, delta_semantics=None))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn sample(
        generator: &str,
        n: usize,
        p: usize,
        seed: u64,
        N: Option<usize>,
        gamma: Option<&Bound<'_, PyAny>>,
        delta: Option<usize>,
        delta_semantics: Option<&str>,
    ) -> PyResult<Self> {
        let g = named("generator", generator, GeneratorId::parse)?;
        let mut sp = ShapeParams::new(n, p, seed);
        sp.scenarios = N;
        sp.gamma = gamma.map(to_rational).transpose()?;
        sp.delta = delta;
        sp.delta_semantics = delta_semantics
            .map(|d| named("delta semantics", d, DeltaSemantics::from_name))
            .transpose()?;
        Ok(PyInstance {
            inner: samplers::sample_instance(g, &sp).map_err(py_err)?,
        })
    }

    /// Reads an instance file. Layout keywords are needed only when the
    /// manifest is missing.
    #[staticmethod]
    #[pyo3(signature = (path, criterion=None, uncertainty="Discrete", budget_mode=None, delta_semantics=None))]
    fn read(
        path: PathBuf,
        criterion: Option<&str>,
        uncertainty: &str,
        budget_mode: Option<&str>,
        delta_semantics: Option<&str>,
    ) -> PyResult<Self> {
        let inner = match criterion {
            None => io::read_instance(&path),
            Some(c) => {
                let set = match uncertainty {
                    "Discrete" => SetKind::Discrete,
                    "Interval" => SetKind::Interval,
                    "Budgeted" => {
                        let m = budget_mode.ok_or_else(|| PyValueError::new_err("Budgeted needs budget_mode"))?;
                        SetKind::Budgeted(named("budget mode", m, BudgetMode::from_name)?)
                    }
                    other => return Err(PyValueError::new_err(format!("unknown uncertainty {other:?}"))),
                };
                let layout = Layout {
                    criterion: named("criterion", c, Criterion::from_name)?,
                    set,
                    delta_semantics: delta_semantics
                        .map(|d| named("delta semantics", d, DeltaSemantics::from_name))
                        .transpose()?,
                };
                io::read_instance_as(&path, &layout)
            }
        };
        Ok(PyInstance {
            inner: inner.map_err(py_err)?,
        })
    }

    /// Writes the instance file and its manifest.
    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_instance(&self.inner, path).map_err(py_err)
    }

    fn canonical(&self) -> PyResult<String> {
        io::canonical_string(&self.inner).map_err(py_err)
    }

    fn content_hash(&self) -> PyResult<String> {
        io::content_hash(&self.inner).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }

    #[getter]
    fn criterion(&self) -> &'static str {
        self.inner.criterion.name()
    }

    #[getter]
    fn uncertainty(&self) -> &'static str {
        self.inner.uncertainty.kind_name()
    }

    #[getter]
    fn pairing(&self) -> PyResult<&'static str> {
        Ok(self.inner.pairing().map_err(py_err)?.name())
    }

    #[getter]
    fn kept_min(&self) -> Option<usize> {
        self.inner.kept_min()
    }

    #[getter]
    fn gamma<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.inner.uncertainty.gamma().map(|g| to_fraction(py, g)).transpose()
    }

    #[getter]
    fn scenarios<'py>(&self, py: Python<'py>) -> PyResult<Option<Vec<Bound<'py, PyList>>>> {
        self.inner
            .uncertainty
            .scenarios()
            .map(|s| s.iter().map(|c| cost_list(py, c)).collect())
            .transpose()
    }

    /// `(lower, deviation)` for interval and budgeted sets.
    #[getter]
    fn bounds<'py>(&self, py: Python<'py>) -> PyResult<Option<(Bound<'py, PyList>, Bound<'py, PyList>)>> {
        match self.inner.uncertainty.bounds() {
            Some((l, d)) => Ok(Some((cost_list(py, l)?, cost_list(py, d)?))),
            None => Ok(None),
        }
    }

    #[getter]
    fn first_stage<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyList>>> {
        self.inner.first_stage_costs.as_ref().map(|c| cost_list(py, c)).transpose()
    }

    fn robust_value<'py>(&self, py: Python<'py>, indices: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        let v = model::robust_value(&self.solution(indices)?, &self.inner).map_err(py_err)?;
        to_fraction(py, &v)
    }

    /// Robust objective of `indices` with the adversary's witness.
    fn evaluate<'py>(&self, py: Python<'py>, indices: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
        let rep = model::evaluate_robust(&self.solution(indices)?, &self.inner).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("objective", to_fraction(py, &rep.objective)?)?;
        let kind = match &rep.witness.kind {
            WitnessKind::Scenario(j) => format!("scenario {j}"),
            WitnessKind::RegretWorstCase => "regret_worst_case".into(),
            WitnessKind::UpperBounds => "upper_bounds".into(),
            WitnessKind::DeviationPattern(_) => "deviation_pattern".into(),
            WitnessKind::DeviationAmounts(_) => "deviation_amounts".into(),
        };
        d.set_item("witness", kind)?;
        d.set_item("realized", cost_list(py, &rep.witness.realized)?)?;
        d.set_item("second_stage", rep.second_stage.map(|y| y.indices()))?;
        Ok(d)
    }

    /// Exhaustive robust optimum as `(indices, value)`.
    #[pyo3(signature = (max_n=16))]
    fn brute_force<'py>(&self, py: Python<'py>, max_n: usize) -> PyResult<(Vec<usize>, Bound<'py, PyAny>)> {
        let (x, v) = model::brute_force_robust_opt(&self.inner, BruteForceLimits { max_n }).map_err(py_err)?;
        Ok((x.indices(), to_fraction(py, &v)?))
    }

    /// Solves the compact formulation with the built-in MILP solver.
    #[pyo3(signature = (time_limit=None, node_limit=None))]
    fn solve<'py>(&self, py: Python<'py>, time_limit: Option<f64>, node_limit: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
        let cfg = SolverConfig {
            time_limit: secs(time_limit)?,
            node_limit,
            ..SolverConfig::default()
        };
        let out = py
            .detach(|| solve_formulation(&self.inner, &cfg))
            .map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("status", out.milp.status.as_str())?;
        d.set_item("objective", out.objective.as_ref().map(|v| to_fraction(py, v)).transpose()?)?;
        d.set_item("solution", out.solution.map(|x| x.indices()))?;
        d.set_item("best_bound", out.milp.best_bound)?;
        d.set_item("nodes", out.milp.nodes)?;
        d.set_item("wall_time", out.milp.wall_time.as_secs_f64())?;
        Ok(d)
    }

    /// Perturbs costs within budget `b` to raise the robust optimum.
    /// Returns the hardened instance and a trace dict.
    #[pyo3(signature = (b, mode=None, c_max=None, time_limit=None, max_iterations=100))]
    fn harden<'py>(
        &self,
        py: Python<'py>,
        b: &Bound<'_, PyAny>,
        mode: Option<&str>,
        c_max: Option<&Bound<'_, PyAny>>,
        time_limit: Option<f64>,
        max_iterations: usize,
    ) -> PyResult<(PyInstance, Bound<'py, PyDict>)> {
        let mut cfg = HiroConfig::new(to_rational(b)?);
        if let Some(c) = c_max {
            cfg.c_max = to_rational(c)?;
        }
        cfg.time_limit = secs(time_limit)?;
        cfg.max_iterations = max_iterations;
        cfg.mode = mode.map(|m| named("mode", m, HiroMode::from_name)).transpose()?;
        let (out, trace) = py.detach(|| hiro::harden(&self.inner, &cfg)).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("initial_value", to_fraction(py, &trace.initial_value)?)?;
        d.set_item("best_value", to_fraction(py, &trace.best_value)?)?;
        d.set_item("converged", trace.converged)?;
        d.set_item("iterations", trace.iterations.len())?;
        let masters = trace
            .iterations
            .iter()
            .map(|it| to_fraction(py, &it.master_objective))
            .collect::<PyResult<Vec<_>>>()?;
        d.set_item("master_objectives", masters)?;
        Ok((PyInstance { inner: out }, d))
    }

    /// Sampler invariant violations; empty when the instance is sound.
    fn check_invariants(&self) -> Vec<String> {
        match samplers::check_sampler_invariants(&self.inner) {
            Ok(()) => Vec::new(),
            Err(v) => v.iter().map(|x| x.to_string()).collect(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, p={}, {} x {})",
            self.inner.n,
            self.inner.p,
            self.inner.criterion.name(),
            self.inner.uncertainty.kind_name()
        )
    }

    fn __eq__(&self, other: &PyInstance) -> bool {
        io::canonical_string(&self.inner).ok() == io::canonical_string(&other.inner).ok()
            && self.inner.criterion == other.inner.criterion
    }
}

/// Whether `hardened` lies in the budget-`b` neighborhood of `original`.
#[pyfunction]
#[pyo3(signature = (original, hardened, b, c_max=100))]
fn within_neighborhood(original: &PyInstance, hardened: &PyInstance, b: &Bound<'_, PyAny>, c_max: i64) -> PyResult<bool> {
    Ok(hiro::within_neighborhood(&original.inner, &hardened.inner, &to_rational(b)?, &rational::int(c_max)))
}

/// The generator catalog as a list of dicts.
#[pyfunction]
fn generators<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    samplers::catalog()
        .into_iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("id", e.id.name())?;
            d.set_item("required", e.required.to_vec())?;
            d.set_item("invariants", e.invariants)?;
            Ok(d)
        })
        .collect()
}

/// Runs an experiment from a TOML file or a preset name and returns the
/// summary CSV text.
#[pyfunction]
#[pyo3(name = "bench", signature = (config=None, preset=None, full=false, out=None, threads=None))]
fn run_bench(
    py: Python<'_>,
    config: Option<PathBuf>,
    preset: Option<&str>,
    full: bool,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> PyResult<String> {
    let mut cfg = match (config, preset) {
        (Some(path), None) => ExperimentConfig::load(path).map_err(py_err)?,
        (None, Some(name)) => {
            let c = robsel_core::bench::preset(name).map_err(py_err)?;
            if full {
                c
            } else {
                c.desk()
            }
        }
        _ => return Err(PyValueError::new_err("give exactly one of config or preset")),
    };
    if out.is_some() {
        cfg.out_dir = out;
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }
    let rep = py.detach(|| run_experiment(&cfg)).map_err(py_err)?;
    Ok(summary_csv(&rep.summary))
}

#[pymodule]
pub fn robsel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(within_neighborhood, m)?)?;
    m.add_function(wrap_pyfunction!(generators, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add("PRESETS", robsel_core::bench::PRESETS.to_vec())?;
    Ok(())
}
