//! Experiment harness: configs, seeded runs, summaries, curve files, and the
//! verification suites.

mod config;
mod curves;
mod runner;
mod summary;
mod verify;

pub use config::ExperimentConfig;
pub use curves::emit_curves;
pub use runner::{
    format_csv_row, reward_threshold, run_experiment, run_single_seed, summarize_series,
    RunReport, RunSummary, METRICS_CSV_HEADER,
};
pub use summary::{summarize_runs, CellStats, SummaryTable};
pub use verify::{gradcheck, simcheck, VerifyReport};
