use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::batch::run_batch;
use super::config::ExperimentConfig;
use super::csvfmt::format_sig;
use super::recovery::{default_recovery_tolerance, recovery_statistics};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::solvers::Variant;

const VARIANTS: [Variant; 3] = [Variant::Dcga1, Variant::Dcga2, Variant::Uga];
const CYCLES: [u64; 2] = [5, 10];
const BLOCKS: [usize; 4] = [5, 10, 15, 20];
const SWITCHING_LENGTHS: [usize; 7] = [12, 24, 36, 48, 60, 72, 84];

/// One configuration of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub name: String,
    /// Cells sharing a figure are drawn together.
    pub figure: String,
    pub label: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: String,
    pub recovered_fraction: f64,
    pub final_mean_best: f64,
    /// Objective evaluations summed over all runs of the cell.
    pub evaluations: u64,
}

fn cell(figure: String, label: String, problem: ProblemSpec, cycle: u64, variant: Variant, base_seed: u64) -> Cell {
    let mut config = ExperimentConfig::new(problem, variant);
    config.cycle = cycle;
    config.base_seed = base_seed;
    let name = format!("{figure}_{label}");
    config.output_dir = name.clone().into();
    Cell {
        name,
        figure,
        label,
        config,
    }
}

/// Configuration grid of experiment `id` (1 to 4) at paper scale.
pub fn experiment_grid(id: u8, base_seed: u64) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    match id {
        1 => {
            for k in [3, 4, 5] {
                for cycle in CYCLES {
                    for variant in VARIANTS {
                        for blocks in BLOCKS {
                            cells.push(cell(
                                format!("trap{k}_c{cycle}_{}", variant.name()),
                                format!("m{blocks}"),
                                ProblemSpec::DynamicTrap { k, blocks },
                                cycle,
                                variant,
                                base_seed,
                            ));
                        }
                    }
                }
            }
        }
        2 => {
            for cycle in CYCLES {
                for variant in VARIANTS {
                    for blocks in BLOCKS {
                        cells.push(cell(
                            format!("mtrap4_c{cycle}_{}", variant.name()),
                            format!("m{blocks}"),
                            ProblemSpec::ModifiedTrap4 { blocks },
                            cycle,
                            variant,
                            base_seed,
                        ));
                    }
                }
            }
        }
        3 => {
            for cycle in CYCLES {
                for variant in VARIANTS {
                    for length in SWITCHING_LENGTHS {
                        cells.push(cell(
                            format!("switch_c{cycle}_{}", variant.name()),
                            format!("l{length}"),
                            ProblemSpec::SwitchingTrap { length },
                            cycle,
                            variant,
                            base_seed,
                        ));
                    }
                }
            }
        }
        4 => {
            for cycle in CYCLES {
                for variant in VARIANTS {
                    cells.push(cell(
                        format!("parabola_c{cycle}_{}", variant.name()),
                        "n10".into(),
                        ProblemSpec::moving_parabola(),
                        cycle,
                        variant,
                        base_seed,
                    ));
                }
            }
        }
        other => return Err(Error::config(format!("experiment must be 1, 2, 3 or 4, got {other}"))),
    }
    Ok(cells)
}

/// Run every cell of experiment `id` under `out`, writing per-cell results,
/// one gnuplot script per figure and `summary.csv`.
pub fn replicate_experiment(id: u8, out: &Path, scale: f64, threads: usize, base_seed: u64) -> Result<Vec<CellSummary>> {
    let cells = experiment_grid(id, base_seed)?;
    fs::create_dir_all(out)?;
    let mut summaries = Vec::with_capacity(cells.len());
    let mut figures: BTreeMap<&str, Vec<&Cell>> = BTreeMap::new();
    for c in &cells {
        let mut config = c.config.scaled(scale)?;
        config.output_dir = out.join(&c.name);
        let result = run_batch(&config, threads)?;
        result.write(&config.output_dir)?;

        let tolerance = default_recovery_tolerance(&config.problem);
        let recovered = result
            .traces
            .iter()
            .map(|t| recovery_statistics(t, config.cycle as usize, tolerance).recovered_fraction())
            .sum::<f64>()
            / result.traces.len() as f64;
        summaries.push(CellSummary {
            cell: c.name.clone(),
            recovered_fraction: recovered,
            final_mean_best: result.aggregate.points.last().map_or(f64::NAN, |p| p.mean),
            evaluations: result.traces.iter().map(|t| t.total_evaluations()).sum(),
        });
        figures.entry(c.figure.as_str()).or_default().push(c);
    }

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out.join("summary.csv"))?;
    w.write_record(["cell", "recovered_fraction", "final_mean_best", "evaluations"])?;
    for s in &summaries {
        w.write_record([
            s.cell.clone(),
            format_sig(s.recovered_fraction, 9),
            format_sig(s.final_mean_best, 9),
            s.evaluations.to_string(),
        ])?;
    }
    w.flush()?;

    let fig_dir = out.join("figures");
    fs::create_dir_all(&fig_dir)?;
    for (figure, members) in figures {
        let mut f = BufWriter::new(fs::File::create(fig_dir.join(format!("{figure}.gp")))?);
        writeln!(f, "set terminal pngcairo size 640,480")?;
        writeln!(f, "set output '{figure}.png'")?;
        writeln!(f, "set title '{figure}'")?;
        writeln!(f, "set xlabel 'generation'")?;
        writeln!(f, "set ylabel 'mean best fitness'")?;
        let curves: Vec<String> = members
            .iter()
            .map(|c| format!("'../{}/plot.dat' using 1:2 with lines title '{}'", c.name, c.label))
            .collect();
        writeln!(f, "plot {}", curves.join(", \\\n     "))?;
        f.flush()?;
    }
    Ok(summaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(experiment_grid(1, 0).unwrap().len(), 72);
        assert_eq!(experiment_grid(2, 0).unwrap().len(), 24);
        assert_eq!(experiment_grid(3, 0).unwrap().len(), 42);
        assert_eq!(experiment_grid(4, 0).unwrap().len(), 6);
        assert!(experiment_grid(5, 0).is_err());
    }

    #[test]
    fn cell_names_are_unique_and_valid() {
        for id in 1..=4 {
            let cells = experiment_grid(id, 3).unwrap();
            let names: std::collections::HashSet<_> = cells.iter().map(|c| c.name.clone()).collect();
            assert_eq!(names.len(), cells.len());
            for c in &cells {
                c.config.validate().unwrap();
                assert_eq!((c.config.population_size, c.config.runs, c.config.generations), (5000, 30, 100));
            }
        }
    }
}
