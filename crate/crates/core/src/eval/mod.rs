//! Metrics, the synthetic listing generator, the experiment runner and
//! report rendering.

mod experiment;
mod metrics;
mod report;
mod synth;

pub use experiment::{
    run_experiment, run_on_table, DataSource, ExperimentConfig, ExperimentError, RosterEntry,
    TargetMode,
};
pub use metrics::{mae, mse, rmse, MetricError, MetricsRow};
pub use report::{format_cell, render_report, MetricsReport, ReportFormat, ReportRow};
pub use synth::{generate_synthetic, SyntheticError, SyntheticSpec};
