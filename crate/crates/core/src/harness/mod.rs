//! Experiment orchestration, analytics and reports.

mod bench;
mod config;
mod experiment;
mod fit;
mod plot;
mod reference;

pub use bench::{benchmark_mode, write_bench_csv, BenchRow};
pub use config::ExperimentConfig;
pub use experiment::{
    job_seed, read_report, run_experiment, run_settings, theory_report, write_report, Report, ReportMeta, ReportRow,
    SettingCounts, SettingGrid, REPORT_COLUMNS,
};
pub use fit::{eval_exponential, fit_exponential, fit_report, predicted_c, FitPoint, FitResult, MIN_FIT_N};
pub use plot::{plot_data, PlotData, Series};
pub use reference::{compare_reference, reference_rows, CellDiff, DiffReport, ReferenceRow, TableId, Tolerances};

/// Version plus `git describe` of the build, written into every output.
pub fn stamp() -> String {
    format!("toffrot {} ({})", env!("CARGO_PKG_VERSION"), env!("TOFFROT_GIT_DESCRIBE"))
}
