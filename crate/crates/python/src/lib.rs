//! Python bindings for bellkit.
//!
//! Tallies are exposed as a class; reports come back as plain dicts built
//! from the same JSON the command-line tool prints.

use bellkit_core as core;
use bellkit_core::{AnalyzeOptions, Metadata, Model, SettingScheme, SimulationConfig, TrialFormat};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "TallyTable", module = "bellkit", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyTally(core::TallyTable);

#[pymethods]
impl PyTally {
    #[new]
    #[pyo3(signature = (a=0, b=0, c=0, d=0, n00=0, n01=0, n10=0, n11=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(a: u64, b: u64, c: u64, d: u64, n00: u64, n01: u64, n10: u64, n11: u64) -> Self {
        PyTally(core::TallyTable { a, b, c, d, n00, n01, n10, n11 })
    }

    #[getter]
    fn a(&self) -> u64 {
        self.0.a
    }
    #[getter]
    fn b(&self) -> u64 {
        self.0.b
    }
    #[getter]
    fn c(&self) -> u64 {
        self.0.c
    }
    #[getter]
    fn d(&self) -> u64 {
        self.0.d
    }
    #[getter]
    fn n00(&self) -> u64 {
        self.0.n00
    }
    #[getter]
    fn n01(&self) -> u64 {
        self.0.n01
    }
    #[getter]
    fn n10(&self) -> u64 {
        self.0.n10
    }
    #[getter]
    fn n11(&self) -> u64 {
        self.0.n11
    }

    #[getter]
    fn total(&self) -> u128 {
        self.0.total()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::TallyTable::from_json(text).map(PyTally).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &core::validate_tally(&self.0))
    }

    fn __add__(&self, other: &PyTally) -> PyResult<PyTally> {
        core::merge_tallies(&self.0, &other.0).map(PyTally).map_err(err)
    }

    fn __repr__(&self) -> String {
        let t = &self.0;
        format!(
            "TallyTable(a={}, b={}, c={}, d={}, n00={}, n01={}, n10={}, n11={})",
            t.a, t.b, t.c, t.d, t.n00, t.n01, t.n10, t.n11
        )
    }
}

/// Parses one JSONL or CSV trial line into `(s1, s2, o1, o2)`.
#[pyfunction]
#[pyo3(signature = (line, format="jsonl"))]
fn parse_trial_line(line: &str, format: &str) -> PyResult<(u8, u8, i8, i8)> {
    let format: TrialFormat = format.parse().map_err(err)?;
    let t = core::parse_trial_line(line, format, 1).map_err(err)?;
    Ok((t.s1(), t.s2(), t.o1(), t.o2()))
}

#[pyfunction]
fn tally_from_trials(trials: Vec<(u8, u8, i8, i8)>) -> PyResult<PyTally> {
    let records = trials
        .into_iter()
        .map(|(s1, s2, o1, o2)| core::TrialRecord::new(s1, s2, o1, o2))
        .collect::<core::Result<Vec<_>>>()
        .map_err(err)?;
    Ok(PyTally(core::tally_from_trials(&records)))
}

#[pyfunction]
fn correlation_coefficient(corr_count: u64, trial_count: u64) -> PyResult<f64> {
    core::correlation_coefficient(corr_count, trial_count).map_err(err)
}

#[pyfunction]
fn chsh_statistic(py: Python<'_>, tally: &PyTally) -> PyResult<Py<PyAny>> {
    to_py(py, &core::chsh_statistic(&tally.0).map_err(err)?)
}

#[pyfunction]
fn uniform_prob_s(p: f64) -> PyResult<f64> {
    core::uniform_prob_s(p).map_err(err)
}

/// Returns `(sigma, n_max, n_min)`.
#[pyfunction]
fn skew(tally: &PyTally) -> (u64, u64, u64) {
    let s = core::skew(&tally.0);
    (s.sigma, s.n_max, s.n_min)
}

/// Returns `(s_prime, s_prime_max, s_prime_min)`.
#[pyfunction]
fn sprime(tally: &PyTally) -> (i128, i128, i128) {
    let s = core::sprime(&tally.0);
    (s.s_prime, s.s_prime_max, s.s_prime_min)
}

#[pyfunction]
fn chsh_from_sprime(s_prime: i128, n: u64) -> PyResult<f64> {
    core::chsh_from_sprime(s_prime, n).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (tally, epsilon=None))]
fn nosignalling_deltas(py: Python<'_>, tally: &PyTally, epsilon: Option<f64>) -> PyResult<Py<PyAny>> {
    let mut r = core::nosignalling_deltas(&tally.0).map_err(err)?;
    if let Some(eps) = epsilon {
        r = r.with_requested(eps).map_err(err)?;
    }
    to_py(py, &r)
}

#[pyfunction]
fn min_trials(epsilon: f64) -> PyResult<u64> {
    core::min_trials(epsilon).map_err(err)
}

#[pyfunction]
fn epsilon_floor(delta: f64) -> PyResult<f64> {
    core::epsilon_floor(delta).map_err(err)
}

/// NΔ/24 as `(numerator, denominator)`.
#[pyfunction]
fn required_skew(n: u64, delta: f64) -> PyResult<(String, String)> {
    let r = core::required_skew(n, delta).map_err(err)?;
    Ok((r.numer().to_string(), r.denom().to_string()))
}

#[pyfunction]
#[pyo3(signature = (n_min, sigma, n, delta_small=0.0))]
fn violation_possible(n_min: u64, sigma: u64, n: u64, delta_small: f64) -> PyResult<bool> {
    let ds = core::exact::from_f64(delta_small)
        .filter(|_| delta_small >= 0.0)
        .ok_or_else(|| PyValueError::new_err("delta_small must be finite and nonnegative"))?;
    Ok(core::violation_possible(n_min, sigma, n, &ds))
}

fn build_config(
    model: &str,
    angles: (f64, f64, f64, f64),
    trials: u64,
    seed: u64,
    settings: &str,
    flip_station2: bool,
) -> PyResult<SimulationConfig> {
    let cfg = SimulationConfig {
        model: model.parse::<Model>().map_err(err)?,
        theta_a0: angles.0,
        theta_a1: angles.1,
        theta_b0: angles.2,
        theta_b1: angles.3,
        trials,
        seed,
        setting_scheme: settings.parse::<SettingScheme>().map_err(err)?,
        flip_station2,
    };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Runs a simulation and returns its tally. Identical for any `shards`.
#[pyfunction]
#[pyo3(signature = (model, angles, trials, seed=0, settings="uniform", flip_station2=false, shards=1))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    model: &str,
    angles: (f64, f64, f64, f64),
    trials: u64,
    seed: u64,
    settings: &str,
    flip_station2: bool,
    shards: usize,
) -> PyResult<PyTally> {
    let cfg = build_config(model, angles, trials, seed, settings, flip_station2)?;
    py.detach(|| core::simulate_tally(&cfg, shards)).map(PyTally).map_err(err)
}

/// The ordered trial stream of a run as `(s1, s2, o1, o2)` tuples.
#[pyfunction]
#[pyo3(signature = (model, angles, trials, seed=0, settings="uniform", flip_station2=false))]
fn simulate_trials(
    model: &str,
    angles: (f64, f64, f64, f64),
    trials: u64,
    seed: u64,
    settings: &str,
    flip_station2: bool,
) -> PyResult<Vec<(u8, u8, i8, i8)>> {
    let cfg = build_config(model, angles, trials, seed, settings, flip_station2)?;
    let stream = core::TrialStream::new(&cfg).map_err(err)?;
    Ok(stream.map(|t| (t.s1(), t.s2(), t.o1(), t.o2())).collect())
}

#[pyfunction]
#[pyo3(signature = (tally, epsilon=None, delta=None, seed=None))]
fn analyze(
    py: Python<'_>,
    tally: &PyTally,
    epsilon: Option<f64>,
    delta: Option<f64>,
    seed: Option<u64>,
) -> PyResult<Py<PyAny>> {
    let opts = AnalyzeOptions { epsilon, delta, bell1964: None };
    to_py(py, &core::analyze(&tally.0, &opts, Metadata::new(None, seed)).map_err(err)?)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn bell1964_statistic(
    py: Python<'_>,
    trials_ac: u64,
    trials_ba: u64,
    trials_bc: u64,
    corr_ac: u64,
    corr_ba: u64,
    corr_bc: u64,
) -> PyResult<Py<PyAny>> {
    let t = core::ThreeSettingTally { trials_ac, trials_ba, trials_bc, corr_ac, corr_ba, corr_bc };
    to_py(py, &core::bell1964_statistic(&t).map_err(err)?)
}

#[pyfunction]
fn verify_necessary_conditions(py: Python<'_>, n_per_setting: u64) -> PyResult<Py<PyAny>> {
    let report = py
        .detach(|| core::verify_necessary_conditions(n_per_setting))
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn bellkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTally>()?;
    m.add_function(wrap_pyfunction!(parse_trial_line, m)?)?;
    m.add_function(wrap_pyfunction!(tally_from_trials, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_prob_s, m)?)?;
    m.add_function(wrap_pyfunction!(skew, m)?)?;
    m.add_function(wrap_pyfunction!(sprime, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_from_sprime, m)?)?;
    m.add_function(wrap_pyfunction!(nosignalling_deltas, m)?)?;
    m.add_function(wrap_pyfunction!(min_trials, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_floor, m)?)?;
    m.add_function(wrap_pyfunction!(required_skew, m)?)?;
    m.add_function(wrap_pyfunction!(violation_possible, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_trials, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(bell1964_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(verify_necessary_conditions, m)?)?;
    m.add("__version__", core::report::TOOL_VERSION)?;
    Ok(())
}
