//! Experiment driver: configuration, seeded noise, error metrics and CSV reports.

pub mod config;
pub mod metrics;
pub mod noise;
pub mod report;
pub mod run;

pub use config::{parse_lambda, sweep_values, CoefficientSpec, ExperimentConfig, Preset, Profile};
pub use metrics::{error_metrics, relative_l2, ErrorMetrics};
pub use noise::add_noise;
pub use report::{read_report_body, ReportWriter, REPORT_FILE, TIMINGS_FILE};
pub use run::{run_experiment, run_into, ExperimentReport, ReportRow};
