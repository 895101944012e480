//! Benchmark harness: run several methods on one target stream and tabulate
//! NLL, MAE, MSE and delay per method.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::baseline::run_baseline_gp;
use super::metrics::Metrics;
use crate::data::NormalizationStats;
use crate::fusion::{run_stream, EnsembleConfig, EnsembleState, PredictionRecord};
use crate::gp::{FitConfig, TemporalFeature, TimeSeries};
use crate::par::{map_slice, Execution};
use crate::{Error, Result};

/// A method with its inputs resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Zero-delay fusion of imported temporal features.
    Gptdf {
        name: String,
        features: Vec<TemporalFeature>,
    },
    /// GP trained on the first `n_train` points of the target stream.
    Gp { name: String, n_train: usize },
}

impl Method {
    pub fn name(&self) -> &str {
        match self {
            Method::Gptdf { name, .. } | Method::Gp { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub nll: f64,
    pub mae: f64,
    pub mse: f64,
    pub delay: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One point of the plot-ready per-step series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPoint {
    pub step: usize,
    pub t: f64,
    pub y: f64,
    pub mean: f64,
    pub var: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<ReportRow>,
    /// Per-method prediction logs, in row order. Empty for failed methods.
    pub logs: Vec<Vec<PredictionRecord>>,
    /// Per-method plot series, in row order.
    pub series: Vec<Vec<StepPoint>>,
}

fn rescale(log: &[PredictionRecord], stats: &NormalizationStats) -> Vec<PredictionRecord> {
    log.iter()
        .map(|r| PredictionRecord {
            fused_mean: stats.invert(r.fused_mean),
            fused_variance: r.fused_variance * stats.std * stats.std,
            interval_low: stats.invert(r.interval_low),
            interval_high: stats.invert(r.interval_high),
            ..r.clone()
        })
        .collect()
}

fn run_method(
    method: &Method,
    stream: &TimeSeries,
    fit: &FitConfig,
    ensemble: &EnsembleConfig,
) -> Result<Vec<PredictionRecord>> {
    match method {
        Method::Gptdf { features, .. } => {
            let mut state = EnsembleState::from_features(features, ensemble.clone())?;
            run_stream(&mut state, stream)
        }
        Method::Gp { n_train, .. } => Ok(run_baseline_gp(stream, *n_train, fit, ensemble)?.log),
    }
}

/// Run each method on `stream`, returning `(name, log)` pairs in method order.
pub fn run_methods(
    methods: &[Method],
    stream: &TimeSeries,
    fit: &FitConfig,
    ensemble: &EnsembleConfig,
    execution: Execution,
) -> Vec<(String, Result<Vec<PredictionRecord>>)> {
    let logs = map_slice(execution, methods, |m| run_method(m, stream, fit, ensemble));
    methods.iter().map(|m| m.name().to_string()).zip(logs).collect()
}

/// Run every method on `stream` (already in the normalized space the
/// features live in).
///
/// When `original_scale` is given, metrics and series are reported after
/// mapping predictions and truths back through it.
pub fn run_benchmark(
    methods: &[Method],
    stream: &TimeSeries,
    fit: &FitConfig,
    ensemble: &EnsembleConfig,
    execution: Execution,
    original_scale: Option<&NormalizationStats>,
) -> Result<BenchReport> {
    if methods.is_empty() {
        return Err(Error::Config("benchmark needs at least one method".into()));
    }
    let runs = run_methods(methods, stream, fit, ensemble, execution);
    BenchReport::from_runs(runs, stream, original_scale)
}

impl BenchReport {
    /// Score finished runs against `stream`. Failed runs become error rows.
    pub fn from_runs(
        runs: Vec<(String, Result<Vec<PredictionRecord>>)>,
        stream: &TimeSeries,
        original_scale: Option<&NormalizationStats>,
    ) -> Result<BenchReport> {
        let truth_stream = match original_scale {
            Some(stats) => stats.invert_series(stream),
            None => stream.clone(),
        };
        let mut report = BenchReport {
            rows: Vec::with_capacity(runs.len()),
            logs: Vec::with_capacity(runs.len()),
            series: Vec::with_capacity(runs.len()),
        };
        for (name, outcome) in runs {
            let scored = outcome.and_then(|log| {
                let log = match original_scale {
                    Some(stats) => rescale(&log, stats),
                    None => log,
                };
                let metrics = Metrics::from_log(&log, &truth_stream)?;
                Ok((log, metrics))
            });
            match scored {
                Ok((log, metrics)) => {
                    report.rows.push(ReportRow {
                        method: name,
                        nll: metrics.nll,
                        mae: metrics.mae,
                        mse: metrics.mse,
                        delay: metrics.delay,
                        error: None,
                    });
                    report.series.push(
                        log.iter()
                            .map(|r| StepPoint {
                                step: r.step,
                                t: r.t,
                                y: truth_stream.values()[r.step],
                                mean: r.fused_mean,
                                var: r.fused_variance,
                                lo: r.interval_low,
                                hi: r.interval_high,
                            })
                            .collect(),
                    );
                    report.logs.push(log);
                }
                Err(e) => {
                    report.rows.push(ReportRow {
                        method: name,
                        nll: f64::NAN,
                        mae: f64::NAN,
                        mse: f64::NAN,
                        delay: stream.len(),
                        error: Some(e.to_string()),
                    });
                    report.series.push(Vec::new());
                    report.logs.push(Vec::new());
                }
            }
        }
        Ok(report)
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Protocol(e.to_string())
}

impl BenchReport {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// `method,nll,mae,mse,delay`, plus an `error` column when any method failed.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_errors = self.has_errors();
        let mut header = vec!["method", "nll", "mae", "mse", "delay"];
        if with_errors {
            header.push("error");
        }
        w.write_record(&header).map_err(io_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.method.clone(),
                r.nll.to_string(),
                r.mae.to_string(),
                r.mse.to_string(),
                r.delay.to_string(),
            ];
            if with_errors {
                rec.push(r.error.clone().unwrap_or_default());
            }
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io_err)?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| io_err("short row"))?
                    .parse::<f64>()
                    .map_err(io_err)
            };
            rows.push(ReportRow {
                method: rec.get(0).unwrap_or_default().to_string(),
                nll: num(1)?,
                mae: num(2)?,
                mse: num(3)?,
                delay: rec.get(4).ok_or_else(|| io_err("short row"))?.parse().map_err(io_err)?,
                error: rec.get(5).filter(|e| !e.is_empty()).map(str::to_string),
            });
        }
        Ok(rows)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.rows).map_err(io_err)
    }

    /// Per-step series of row `index` as `step,t,y,mean,var,lo,hi`.
    pub fn write_series_csv<W: Write>(&self, index: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "t", "y", "mean", "var", "lo", "hi"])
            .map_err(io_err)?;
        for p in &self.series[index] {
            w.write_record([
                p.step.to_string(),
                p.t.to_string(),
                p.y.to_string(),
                p.mean.to_string(),
                p.var.to_string(),
                p.lo.to_string(),
                p.hi.to_string(),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}
