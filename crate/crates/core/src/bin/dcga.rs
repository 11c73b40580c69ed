use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dcga::harness::{
    default_recovery_tolerance, load_config, recovery_statistics, replicate_experiment, run_batch,
};
use dcga::problems::PROBLEM_NAMES;
use dcga::Error;

/// Extended compact GA and its dynamic-environment variants.
#[derive(Debug, Parser)]
#[command(name = "dcga", version)]
struct Cli {
    /// Override the base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configured batch of seeded runs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Multiply population size and run count.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicate one of the four experiment grids.
    Replicate {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        experiment: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Print the problem catalog.
    ListProblems,
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            scale,
            threads,
            out,
        } => {
            let mut config = load_config(&config)?.scaled(scale)?;
            if let Some(seed) = cli.seed {
                config.base_seed = seed;
            }
            if let Some(out) = out {
                config.output_dir = out;
            }
            let result = run_batch(&config, threads)?;
            result.write(&config.output_dir)?;
            let tolerance = default_recovery_tolerance(&config.problem);
            let recovered = result
                .traces
                .iter()
                .map(|t| recovery_statistics(t, config.cycle as usize, tolerance).recovered_fraction())
                .sum::<f64>()
                / result.traces.len() as f64;
            let last = result.aggregate.points.last().map_or(f64::NAN, |p| p.mean);
            println!(
                "{} runs of {} on {} -> {} (final mean best {last:.6}, recovered fraction {recovered:.3})",
                config.runs,
                config.variant.name(),
                config.problem.name(),
                config.output_dir.display()
            );
        }
        Command::Replicate {
            experiment,
            out,
            scale,
            threads,
        } => {
            let summaries = replicate_experiment(experiment, &out, scale, threads, cli.seed.unwrap_or(1))?;
            for s in &summaries {
                println!(
                    "{:<32} recovered {:.3}  final {:.6}",
                    s.cell, s.recovered_fraction, s.final_mean_best
                );
            }
            println!("summary: {}", out.join("summary.csv").display());
        }
        Command::ListProblems => {
            for name in PROBLEM_NAMES {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
