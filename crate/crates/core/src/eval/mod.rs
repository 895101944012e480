//! Metrics, the train-then-predict GP baseline and the benchmark harness.

mod baseline;
mod bench;
mod metrics;

pub use baseline::{run_baseline_gp, BaselineRun};
pub use bench::{run_benchmark, run_methods, BenchReport, Method, ReportRow, StepPoint};
pub use metrics::{delay, mae, mse, nll, Metrics};
