//! Python bindings for the `dcga` crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dcga::genome::{Genome, Population};
use dcga::harness::{self, recovery_statistics};
use dcga::model::{self, GenePartition};
use dcga::problems::{self, DynamicProblem, ProblemSpec, Sense};
use dcga::solvers::{self, SolverConfig, Variant};

fn to_py(e: dcga::Error) -> PyErr {
    if e.is_validation() || matches!(e, dcga::Error::Logic(_)) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_genome(bits: &str) -> PyResult<Genome> {
    bits.parse().map_err(to_py)
}

fn population(rows: Vec<String>) -> PyResult<Population> {
    let genomes = rows.iter().map(|r| parse_genome(r)).collect::<PyResult<Vec<_>>>()?;
    Population::from_genomes(genomes).map_err(to_py)
}

fn parse_variant(name: &str) -> PyResult<Variant> {
    serde_json::from_value(serde_json::Value::String(name.to_owned()))
        .map_err(|_| PyValueError::new_err(format!("unknown variant {name:?}")))
}

/// A catalog benchmark, built from the same JSON object used in config files.
#[pyclass(name = "Problem", module = "dcga_py")]
struct PyProblem {
    spec: ProblemSpec,
    inner: problems::Problem,
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(spec_json: &str) -> PyResult<Self> {
        let spec: ProblemSpec =
            serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = spec.build().map_err(to_py)?;
        Ok(PyProblem { spec, inner })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.spec.name()
    }

    #[getter]
    fn genome_length(&self) -> usize {
        self.inner.genome_length()
    }

    #[getter]
    fn minimize(&self) -> bool {
        self.inner.sense() == Sense::Minimize
    }

    /// Fitness of a `"0101..."` bit string at `phase`.
    fn evaluate(&self, bits: &str, phase: usize) -> PyResult<f64> {
        self.inner.evaluate(&parse_genome(bits)?, phase).map_err(to_py)
    }

    fn optimum_value(&self, phase: usize) -> f64 {
        self.inner.optimum_value(phase)
    }

    /// Apply one environment change (moves the parabola's offset).
    fn advance(&mut self) {
        self.inner.on_change();
    }

    fn __repr__(&self) -> String {
        format!("Problem({})", serde_json::to_string(&self.spec).unwrap_or_default())
    }
}

#[pyfunction]
fn trap_value(u: usize, k: usize, low: f64, high: f64) -> PyResult<f64> {
    problems::trap_value(u, k, low, high).map_err(to_py)
}

#[pyfunction]
fn decode_binary(bits: &str, lower: f64, upper: f64) -> PyResult<f64> {
    let g = parse_genome(bits)?;
    problems::decode_binary(&g.iter().collect::<Vec<_>>(), lower, upper).map_err(to_py)
}

#[pyfunction]
fn group_entropy(rows: Vec<String>, group: Vec<usize>) -> PyResult<f64> {
    model::group_entropy(&population(rows)?, &group).map_err(to_py)
}

/// `(compressed_population_complexity, model_complexity, total)`.
#[pyfunction]
fn mdl_score(rows: Vec<String>, groups: Vec<Vec<usize>>) -> PyResult<(f64, f64, f64)> {
    let pop = population(rows)?;
    let partition = GenePartition::new(groups, pop.genome_length()).map_err(to_py)?;
    let s = model::mdl_score(&pop, &partition).map_err(to_py)?;
    Ok((s.compressed_population_complexity, s.model_complexity, s.total))
}

/// Greedy MDL partition of the given bit strings, as a list of index groups.
#[pyfunction]
fn greedy_model_search(rows: Vec<String>) -> PyResult<Vec<Vec<usize>>> {
    let m = model::greedy_model_search(&population(rows)?).map_err(to_py)?;
    Ok(m.partition().groups().to_vec())
}

#[pyfunction]
fn predicted_convergence_time(genome_length: usize, selection_intensity: f64) -> PyResult<f64> {
    solvers::predicted_convergence_time(genome_length, selection_intensity).map_err(to_py)
}

/// Run one seeded solver and return its trace as a list of dicts.
#[pyfunction]
#[pyo3(signature = (problem, variant, seed, population_size=5000, tournament_size=16, generations=100, cycle=5))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    variant: &str,
    seed: u64,
    population_size: usize,
    tournament_size: usize,
    generations: usize,
    cycle: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = SolverConfig {
        variant: parse_variant(variant)?,
        population_size,
        tournament_size,
        generations,
        cycle,
        ..SolverConfig::default()
    };
    let trace = solvers::run(&config, &problem.inner, seed).map_err(to_py)?;
    trace
        .records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("generation", r.generation)?;
            d.set_item("phase", r.phase)?;
            d.set_item("changed", r.changed)?;
            d.set_item("best", r.best)?;
            d.set_item("mean", r.mean)?;
            d.set_item("optimum", r.optimum)?;
            d.set_item("groups", r.groups())?;
            d.set_item("largest_group", r.largest_group())?;
            d.set_item("partition", r.partition_string())?;
            d.set_item("evals", r.evals)?;
            Ok(d)
        })
        .collect()
}

/// Load a JSON config, run its batch and write result files.
/// Returns `(final mean best, mean recovered fraction)`.
#[pyfunction]
#[pyo3(signature = (config_path, scale=1.0, threads=1, output_dir=None))]
fn run_config(config_path: &str, scale: f64, threads: usize, output_dir: Option<String>) -> PyResult<(f64, f64)> {
    let mut config = harness::load_config(config_path)
        .and_then(|c| c.scaled(scale))
        .map_err(to_py)?;
    if let Some(dir) = output_dir {
        config.output_dir = dir.into();
    }
    let result = harness::run_batch(&config, threads).map_err(to_py)?;
    result.write(&config.output_dir).map_err(to_py)?;
    let tolerance = harness::default_recovery_tolerance(&config.problem);
    let recovered = result
        .traces
        .iter()
        .map(|t| recovery_statistics(t, config.cycle as usize, tolerance).recovered_fraction())
        .sum::<f64>()
        / result.traces.len() as f64;
    let last = result.aggregate.points.last().map_or(f64::NAN, |p| p.mean);
    Ok((last, recovered))
}

#[pymodule]
fn dcga_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(trap_value, m)?)?;
    m.add_function(wrap_pyfunction!(decode_binary, m)?)?;
    m.add_function(wrap_pyfunction!(group_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(mdl_score, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_model_search, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_convergence_time, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("PROBLEMS", problems::PROBLEM_NAMES.to_vec())?;
    Ok(())
}
