use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csvfmt::format_sig;
use super::plot::emit_plot_data;
use crate::error::{Error, Result};
use crate::problems::{DynamicProblem, Sense};
use crate::rng::run_seed;
use crate::solvers::{run, RunTrace};

pub const TRACE_HEADER: [&str; 11] = [
    "run",
    "generation",
    "phase",
    "changed",
    "best",
    "mean",
    "optimum",
    "groups",
    "largest_group",
    "partition",
    "evals",
];

const SIG: usize = 9;

/// Cross-run statistics of best-of-generation fitness at one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePoint {
    pub generation: usize,
    pub phase: usize,
    pub optimum: f64,
    pub mean: f64,
    /// Population standard deviation over runs.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub sense: Sense,
    pub points: Vec<AggregatePoint>,
}

impl AggregateSeries {
    /// Statistics in run order; traces must share one length.
    pub fn from_traces(traces: &[RunTrace]) -> Result<Self> {
        let first = traces
            .first()
            .ok_or_else(|| Error::logic("cannot aggregate zero runs"))?;
        let g = first.records.len();
        if traces.iter().any(|t| t.records.len() != g) {
            return Err(Error::logic("traces differ in length"));
        }
        let n = traces.len() as f64;
        let points = (0..g)
            .map(|t| {
                let values: Vec<f64> = traces.iter().map(|tr| tr.records[t].best).collect();
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let rec = &first.records[t];
                AggregatePoint {
                    generation: rec.generation,
                    phase: rec.phase,
                    optimum: rec.optimum,
                    mean,
                    std: var.sqrt(),
                    min: values.iter().cloned().fold(f64::INFINITY, f64::min),
                    max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect();
        Ok(AggregateSeries {
            sense: first.sense,
            points,
        })
    }

    pub fn mean_series(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["generation", "phase", "optimum", "mean", "std", "min", "max"])?;
        for p in &self.points {
            w.write_record([
                p.generation.to_string(),
                p.phase.to_string(),
                format_sig(p.optimum, SIG),
                format_sig(p.mean, SIG),
                format_sig(p.std, SIG),
                format_sig(p.min, SIG),
                format_sig(p.max, SIG),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub fn write_trace_csv(trace: &RunTrace, run: usize, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            run.to_string(),
            r.generation.to_string(),
            r.phase.to_string(),
            (r.changed as u8).to_string(),
            format_sig(r.best, SIG),
            format_sig(r.mean, SIG),
            format_sig(r.optimum, SIG),
            r.groups().to_string(),
            r.largest_group().to_string(),
            r.partition_string(),
            r.evals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub config: ExperimentConfig,
    /// Indexed by run number.
    pub traces: Vec<RunTrace>,
    pub aggregate: AggregateSeries,
}

impl BatchResult {
    /// Write `run_<r>.csv`, `aggregate.csv`, `plot.dat` and `plot.gp` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (r, trace) in self.traces.iter().enumerate() {
            write_trace_csv(trace, r, &dir.join(format!("run_{r}.csv")))?;
        }
        self.aggregate.write_csv(&dir.join("aggregate.csv"))?;
        emit_plot_data(&self.aggregate, &dir.join("plot.dat"))?;
        let mut f = fs::File::create(dir.join("config.json"))?;
        serde_json::to_writer_pretty(&mut f, &self.config)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Run every seed of `config` on a pool of `threads` workers.
///
/// Run `r` uses seed `run_seed(base_seed, r)`; results are collected in run
/// order, so output does not depend on scheduling.
pub fn run_batch(config: &ExperimentConfig, threads: usize) -> Result<BatchResult> {
    config.validate()?;
    let problem = config.problem.build()?;
    let solver = config.solver();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::logic(format!("cannot start worker pool: {e}")))?;
    let traces: Vec<Result<RunTrace>> = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|r| {
                let seed = run_seed(config.base_seed, r);
                run(&solver, &problem, seed).map_err(|e| Error::Run {
                    run: r,
                    seed,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
    debug_assert!(traces.iter().all(|t| t.sense == problem.sense()));
    let aggregate = AggregateSeries::from_traces(&traces)?;
    Ok(BatchResult {
        config: config.clone(),
        traces,
        aggregate,
    })
}
