//! Experiment configuration, seeded batches and result files.

mod batch;
mod config;
mod csvfmt;
mod plot;
mod recovery;
mod replicate;

pub use batch::{run_batch, write_trace_csv, AggregatePoint, AggregateSeries, BatchResult, TRACE_HEADER};
pub use config::{load_config, parse_config, ExperimentConfig};
pub use csvfmt::format_sig;
pub use plot::emit_plot_data;
pub use recovery::{default_recovery_tolerance, recovery_statistics, CycleRecovery, RecoveryReport};
pub use replicate::{experiment_grid, replicate_experiment, Cell, CellSummary};
