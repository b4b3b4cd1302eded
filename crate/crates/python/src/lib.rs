//! Python bindings: load tables, run single treatments or whole grids, and
//! rank results.

use std::collections::BTreeMap;
use std::path::PathBuf;

use frugal::engine::{normalized_improvement, parse_arm, run_baseline, run_seed, run_treatment, EngineConfig, Treatment};
use frugal::objective::all_scores;
use frugal::report::{load_report, write_report};
use frugal::runner::{write_outputs, Arm, GridConfig, Manifest};
use frugal::stats::cliffs_delta as cliffs;
use frugal::{Dataset, MockSynthesizer, Sample, SkConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn load(path: &str) -> PyResult<Dataset> {
    Dataset::load_csv(path).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Chebyshev score of every row, in file order.
#[pyfunction]
fn chebyshev_scores(path: &str) -> PyResult<Vec<f64>> {
    Ok(all_scores(&load(path)?))
}

/// Whole-file score summary: rows, median, sd, mean, lo.
#[pyfunction]
fn baseline<'py>(py: Python<'py>, path: &str) -> PyResult<Bound<'py, PyDict>> {
    let b = run_baseline(&load(path)?);
    let d = PyDict::new(py);
    d.set_item("rows", b.rows)?;
    d.set_item("median", b.median)?;
    d.set_item("sd", b.sd)?;
    d.set_item("mean", b.mean)?;
    d.set_item("lo", b.lo)?;
    Ok(d)
}

/// Run one treatment such as "llm/exploit" or "random" once, with the mock
/// synthesizer for warm starts.
#[pyfunction]
#[pyo3(signature = (path, treatment, budget, repeat=0, seed=1, warm_size=4))]
fn run<'py>(
    py: Python<'py>,
    path: &str,
    treatment: &str,
    budget: usize,
    repeat: usize,
    seed: u64,
    warm_size: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let ds = load(path)?;
    let (start, acquire) = parse_arm(treatment).map_err(PyValueError::new_err)?;
    let t = Treatment { start, acquire, budget };
    let mut cfg = EngineConfig::default();
    cfg.warm.b0 = warm_size;
    let r = run_treatment(&ds, t, &cfg, &MockSynthesizer, repeat, run_seed(seed, ds.name(), repeat))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("best", r.best_chebyshev)?;
    d.set_item("evals", r.evaluations_used)?;
    d.set_item("labeled", r.labeled)?;
    d.set_item("fallback", r.warm_fallback)?;
    d.set_item("trace", r.trace.iter().map(|p| (p.eval, p.best)).collect::<Vec<_>>())?;
    Ok(d)
}

/// Run a grid with the mock synthesizer and write the results directory.
/// Returns the number of result records.
#[pyfunction]
#[pyo3(signature = (paths, out, treatments, budgets, repeats=20, seed=1))]
fn run_grid(
    paths: Vec<PathBuf>,
    out: PathBuf,
    treatments: Vec<String>,
    budgets: Vec<usize>,
    repeats: usize,
    seed: u64,
) -> PyResult<usize> {
    let arms = treatments
        .iter()
        .map(|t| parse_arm(t).map(|(start, acquire)| Arm { start, acquire }))
        .collect::<Result<Vec<_>, _>>()
        .map_err(PyValueError::new_err)?;
    let cfg = GridConfig {
        arms,
        budgets,
        repeats,
        seed,
        ..GridConfig::default()
    };
    cfg.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let data = paths
        .iter()
        .map(|p| Dataset::load_csv(p).map(|d| (d, Some(p.clone()))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let datasets: Vec<Dataset> = data.iter().map(|(d, _)| d.clone()).collect();
    let grid = frugal::run_grid(&datasets, &cfg, &MockSynthesizer);
    let manifest = Manifest::new(&cfg, &data, "mock");
    write_outputs(&out, &grid, &manifest).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(grid.results.len())
}

/// Rank a results directory and write its report; returns the report path.
#[pyfunction]
fn rank(results: PathBuf) -> PyResult<PathBuf> {
    let report = load_report(&results, &SkConfig::default()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = results.join("report");
    write_report(&out, &report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(out)
}

#[pyfunction]
fn cliffs_delta(a: Vec<f64>, b: Vec<f64>) -> f64 {
    cliffs(&a, &b)
}

/// Scott-Knott ranks of named samples: `[(rank, name, median), ...]`.
#[pyfunction]
fn scott_knott(samples: BTreeMap<String, Vec<f64>>) -> Vec<(usize, String, f64)> {
    let samples = samples.into_iter().map(|(k, v)| Sample::new(k, v)).collect();
    let table = frugal::scott_knott(samples, &SkConfig::default());
    table
        .ranked()
        .map(|(rank, r)| (rank, r.sample.label.clone(), r.median))
        .collect()
}

/// `(mean(bests) - lo) / (mean - lo)` against the whole file; `None` when
/// every row scores the same.
#[pyfunction]
fn improvement(path: &str, bests: Vec<f64>) -> PyResult<Option<f64>> {
    Ok(normalized_improvement(&bests, &run_baseline(&load(path)?)))
}

#[pymodule]
fn frugal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(chebyshev_scores, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(cliffs_delta, m)?)?;
    m.add_function(wrap_pyfunction!(scott_knott, m)?)?;
    m.add_function(wrap_pyfunction!(improvement, m)?)?;
    Ok(())
}
