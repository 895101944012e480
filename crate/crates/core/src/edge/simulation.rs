//! Scenario-driven simulation of the edge/cloud topology: every historical
//! node fits and reports, then the target node queries and predicts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::channel::{Channel, CloudServer, InProcessChannel, TrafficStats};
use super::message::{FeatureRecord, Message};
use super::node::{run_historical, run_target, ModelSelector, TargetConfig, TargetReport};
use super::registry::Registry;
use crate::data::{generate_synthetic, load_csv, ColumnSpec, CsvOptions, NormalizationMode};
use crate::eval::{BenchReport, Method};
use crate::fusion::EnsembleConfig;
use crate::gp::{FitConfig, TemporalFeature, TimeSeries};
use crate::par::{map_indexed, Execution};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Draw a series from a Matern 5/2 GP with these parameters.
    Synthetic {
        sigma_f: f64,
        sigma_l: f64,
        sigma_n: f64,
        n: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// One column of a CSV file. Relative paths resolve against the scenario file.
    Csv {
        path: PathBuf,
        /// Value column; the last column when omitted.
        #[serde(default)]
        column: Option<ColumnSpec>,
        #[serde(default)]
        time_column: Option<ColumnSpec>,
    },
    /// A node that already holds a fitted feature and only reports it.
    Feature {
        sigma_f: f64,
        sigma_l: f64,
        sigma_n: f64,
        n_points: usize,
    },
}

impl SourceSpec {
    /// Materialize the data. `default_seed` applies to synthetic sources
    /// without an explicit seed; feature sources carry no data.
    pub fn load(&self, default_seed: u64) -> Result<Option<TimeSeries>> {
        match self {
            SourceSpec::Synthetic {
                sigma_f,
                sigma_l,
                sigma_n,
                n,
                seed,
            } => {
                let feature = TemporalFeature::new(*sigma_f, *sigma_l, *sigma_n)?;
                generate_synthetic(&feature, *n, seed.unwrap_or(default_seed)).map(Some)
            }
            SourceSpec::Csv {
                path,
                column,
                time_column,
            } => {
                let options = CsvOptions {
                    value_column: column.clone(),
                    time_column: time_column.clone(),
                    use_time_values: false,
                };
                Ok(Some(load_csv(path, &options)?.series))
            }
            SourceSpec::Feature { .. } => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub source: SourceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    /// Row label of the fusion method in the report.
    pub method_name: String,
    pub historical: Vec<NodeSpec>,
    pub target: Option<NodeSpec>,
    pub select: ModelSelector,
    pub limit: Option<usize>,
    /// Training sizes of GP baselines run on the same target stream.
    pub baselines: Vec<usize>,
    pub normalization: NormalizationMode,
    pub normalize_historical: bool,
    pub fit: FitConfig,
    pub ensemble: EnsembleConfig,
    pub execution: Execution,
    pub registry_path: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 0,
            method_name: "GPTDF".into(),
            historical: Vec::new(),
            target: None,
            select: ModelSelector::All,
            limit: None,
            baselines: Vec::new(),
            normalization: NormalizationMode::Offline,
            normalize_historical: true,
            fit: FitConfig::default(),
            ensemble: EnsembleConfig::default(),
            execution: Execution::default(),
            registry_path: None,
        }
    }
}

/// SplitMix64 step, used to derive per-node seeds from the scenario seed.
fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TARGET_STREAM: u64 = u64::MAX;

impl Scenario {
    /// Rebase relative CSV paths onto `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let nodes = self.historical.iter_mut().chain(self.target.iter_mut());
        for node in nodes {
            if let SourceSpec::Csv { path, .. } = &mut node.source {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        if let Some(p) = &mut self.registry_path {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| Error::Config("scenario has no target node".into()))?;
        if matches!(target.source, SourceSpec::Feature { .. }) {
            return Err(Error::Config(
                "the target node needs a data stream, not a feature".into(),
            ));
        }
        let mut ids: Vec<&str> = self.historical.iter().map(|n| n.id.as_str()).collect();
        ids.push(&target.id);
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ids.len() || ids.iter().any(|id| id.is_empty()) {
            return Err(Error::Config("node ids must be unique and non-empty".into()));
        }
        self.ensemble.validate()
    }

    fn load(&self, source: &SourceSpec, stream: u64) -> Result<Option<TimeSeries>> {
        source.load(derive_seed(self.seed, stream))
    }

    /// Raw local data of historical node `index` (`None` for feature-only nodes).
    pub fn historical_series(&self, index: usize) -> Result<Option<TimeSeries>> {
        self.load(&self.historical[index].source, index as u64)
    }

    /// Raw target stream.
    pub fn target_series(&self) -> Result<TimeSeries> {
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| Error::Config("scenario has no target node".into()))?;
        self.load(&target.source, TARGET_STREAM)?
            .ok_or_else(|| Error::Config("the target node needs a data stream".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeOutcome {
    pub node_id: String,
    pub record: Option<FeatureRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// One entry per historical node, in scenario order, followed by the target.
    pub nodes: Vec<NodeOutcome>,
    pub target: Option<TargetReport>,
    /// Fusion row first, then one row per baseline.
    pub report: Option<BenchReport>,
    /// Registry contents ordered by `(fitted_at, source_id)`.
    pub registry: Vec<FeatureRecord>,
    pub traffic: TrafficStats,
    /// Every line that crossed the edge/cloud channel.
    pub transcript: Vec<String>,
    pub errors: Vec<String>,
}

impl SimulationResult {
    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
    }
}

fn report_feature_node(node: &NodeSpec, fitted_at: u64, channel: &dyn Channel) -> Result<FeatureRecord> {
    let SourceSpec::Feature {
        sigma_f,
        sigma_l,
        sigma_n,
        n_points,
    } = node.source
    else {
        unreachable!("only called for feature sources");
    };
    let record = FeatureRecord {
        source_id: node.id.clone(),
        feature: TemporalFeature {
            sigma_f,
            sigma_l,
            sigma_n,
        },
        n_points,
        fitted_at,
    };
    let replies = channel
        .exchange(&Message::report(&record))
        .map_err(|e| e.at_node(&node.id))?;
    replies
        .first()
        .ok_or_else(|| Error::Protocol("report was not acknowledged".into()))
        .and_then(Message::record)
}

/// Run every historical node, then the target node.
///
/// Node failures do not abort the run; they are collected in
/// [`SimulationResult::errors`]. Only an invalid scenario is an `Err`.
pub fn run_simulation(scenario: &Scenario) -> Result<SimulationResult> {
    scenario.validate()?;
    let registry = match &scenario.registry_path {
        Some(path) => Registry::open(path)?,
        None => Registry::in_memory(),
    };
    let channel = InProcessChannel::new(CloudServer::new(registry));
    let mut errors = Vec::new();

    let mut nodes: Vec<NodeOutcome> = map_indexed(scenario.execution, scenario.historical.len(), |i| {
        let node = &scenario.historical[i];
        let fitted_at = i as u64 + 1;
        let outcome = match &node.source {
            SourceSpec::Feature { .. } => report_feature_node(node, fitted_at, &channel),
            _ => scenario
                .historical_series(i)
                .map_err(|e| e.at_node(&node.id))
                .and_then(|data| {
                    let data = data.expect("non-feature sources yield data");
                    let fit = FitConfig {
                        seed: derive_seed(scenario.fit.seed ^ scenario.seed, i as u64),
                        ..scenario.fit.clone()
                    };
                    run_historical(
                        &node.id,
                        &data,
                        fitted_at,
                        &fit,
                        scenario.normalize_historical,
                        &channel,
                    )
                }),
        };
        match outcome {
            Ok(record) => NodeOutcome {
                node_id: node.id.clone(),
                record: Some(record),
                error: None,
            },
            Err(e) => NodeOutcome {
                node_id: node.id.clone(),
                record: None,
                error: Some(e.to_string()),
            },
        }
    });
    errors.extend(nodes.iter().filter_map(|n| n.error.clone()));

    let target_spec = scenario.target.as_ref().expect("validated");
    let target_config = TargetConfig {
        ensemble: scenario.ensemble.clone(),
        selector: scenario.select.clone(),
        limit: scenario.limit,
        normalization: scenario.normalization,
    };
    let target = scenario
        .target_series()
        .map_err(|e| e.at_node(&target_spec.id))
        .and_then(|stream| run_target(&target_spec.id, &stream, &target_config, &channel));
    let (target, report) = match target {
        Ok(t) => {
            let baselines: Vec<Method> = scenario
                .baselines
                .iter()
                .map(|&n_train| Method::Gp {
                    name: format!("GP (N={n_train})"),
                    n_train,
                })
                .collect();
            let mut runs = vec![(scenario.method_name.clone(), Ok(t.log.clone()))];
            runs.extend(crate::eval::run_methods(
                &baselines,
                &t.stream,
                &scenario.fit,
                &scenario.ensemble,
                scenario.execution,
            ));
            let report = BenchReport::from_runs(runs, &t.stream, None)?;
            errors.extend(report.rows.iter().filter_map(|r| r.error.clone()));
            nodes.push(NodeOutcome {
                node_id: t.node_id.clone(),
                record: None,
                error: None,
            });
            (Some(t), Some(report))
        }
        Err(e) => {
            nodes.push(NodeOutcome {
                node_id: target_spec.id.clone(),
                record: None,
                error: Some(e.to_string()),
            });
            errors.push(e.to_string());
            (None, None)
        }
    };

    let mut registry = channel.server().registry().records();
    registry.sort_by(|a, b| {
        a.fitted_at
            .cmp(&b.fitted_at)
            .then_with(|| a.source_id.cmp(&b.source_id))
    });
    Ok(SimulationResult {
        nodes,
        target,
        report,
        registry,
        traffic: channel.stats(),
        transcript: channel.transcript(),
        errors,
    })
}
