use serde::{Deserialize, Serialize};

use super::channel::Channel;
use super::message::{FeatureQuery, FeatureRecord, Message};
use crate::data::{normalize, NormalizationMode, NormalizationStats, StreamNormalizer};
use crate::eval::Metrics;
use crate::fusion::{run_stream, EnsembleConfig, EnsembleState, PredictionRecord};
use crate::gp::{fit_hyperparameters, FitConfig, TemporalFeature, TimeSeries};
use crate::{Error, Result};

/// Model used by a target node when the registry has nothing to offer.
pub const DEFAULT_PRIOR_FEATURE: TemporalFeature = TemporalFeature {
    sigma_f: 1.0,
    sigma_l: 1.0,
    sigma_n: 0.1,
};

/// Which registry records the target fuses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ModelSelector {
    #[default]
    All,
    Ids(Vec<String>),
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum SelectorRepr {
    Keyword(String),
    Ids(Vec<String>),
}

impl Serialize for ModelSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ModelSelector::All => SelectorRepr::Keyword("all".into()),
            ModelSelector::Ids(ids) => SelectorRepr::Ids(ids.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSelector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match SelectorRepr::deserialize(d)? {
            SelectorRepr::Keyword(k) if k == "all" => Ok(ModelSelector::All),
            SelectorRepr::Keyword(k) => Err(serde::de::Error::custom(format!(
                "model selector must be \"all\" or a list of node ids, got {k:?}"
            ))),
            SelectorRepr::Ids(ids) => Ok(ModelSelector::Ids(ids)),
        }
    }
}

impl ModelSelector {
    fn select(&self, response: Vec<FeatureRecord>) -> Result<Vec<FeatureRecord>> {
        match self {
            ModelSelector::All => Ok(response),
            ModelSelector::Ids(ids) => ids
                .iter()
                .map(|id| {
                    response
                        .iter()
                        .find(|r| &r.source_id == id)
                        .cloned()
                        .ok_or_else(|| Error::Config(format!("no feature from node {id:?} in registry response")))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetConfig {
    pub ensemble: EnsembleConfig,
    pub selector: ModelSelector,
    /// Upper bound on the number of records requested from the cloud.
    pub limit: Option<usize>,
    pub normalization: NormalizationMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub node_id: String,
    /// Records the ensemble was built from, in model order.
    pub features: Vec<FeatureRecord>,
    pub used_default_prior: bool,
    pub log: Vec<PredictionRecord>,
    pub metrics: Metrics,
    /// Full-segment statistics, when offline normalization was used.
    pub normalization: Option<NormalizationStats>,
    /// The stream as the ensemble saw it (after normalization).
    pub stream: TimeSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeRole {
    Historical {
        fitted_at: u64,
        fit: FitConfig,
        normalize: bool,
    },
    Target(TargetConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeReport {
    Historical(FeatureRecord),
    Target(Box<TargetReport>),
}

/// Fit the local series and report its feature. Returns the stored record.
pub fn run_historical(
    node_id: &str,
    data: &TimeSeries,
    fitted_at: u64,
    fit: &FitConfig,
    normalize_first: bool,
    channel: &dyn Channel,
) -> Result<FeatureRecord> {
    let attach = |e: Error| e.at_node(node_id);
    let prepared = if normalize_first {
        normalize(data).map_err(attach)?.0
    } else {
        data.clone()
    };
    let outcome = fit_hyperparameters(&prepared, fit).map_err(attach)?;
    let record = FeatureRecord {
        source_id: node_id.to_string(),
        feature: outcome.feature,
        n_points: data.len(),
        fitted_at,
    };
    let replies = channel.exchange(&Message::report(&record)).map_err(attach)?;
    let stored = replies
        .first()
        .ok_or_else(|| Error::Protocol("report was not acknowledged".into()))
        .and_then(Message::record)
        .map_err(attach)?;
    Ok(stored)
}

/// Query the cloud, build the ensemble, and run the fusion loop over `stream`.
pub fn run_target(
    node_id: &str,
    stream: &TimeSeries,
    config: &TargetConfig,
    channel: &dyn Channel,
) -> Result<TargetReport> {
    let attach = |e: Error| e.at_node(node_id);
    let query = FeatureQuery {
        requester_id: node_id.to_string(),
        limit: config.limit,
    };
    let response = channel
        .exchange(&Message::query(&query))
        .and_then(|msgs| msgs.iter().map(Message::record).collect::<Result<Vec<_>>>())
        .map_err(attach)?;
    let features = config.selector.select(response).map_err(attach)?;
    let used_default_prior = features.is_empty();
    let model_features: Vec<TemporalFeature> = if used_default_prior {
        vec![DEFAULT_PRIOR_FEATURE]
    } else {
        features.iter().map(|r| r.feature).collect()
    };

    let (prepared, normalization) = match config.normalization {
        NormalizationMode::Offline => {
            let (s, stats) = normalize(stream).map_err(attach)?;
            (s, Some(stats))
        }
        NormalizationMode::Online => (StreamNormalizer::normalize_series(stream), None),
        NormalizationMode::None => (stream.clone(), None),
    };
    let mut state = EnsembleState::from_features(&model_features, config.ensemble.clone()).map_err(attach)?;
    let log = run_stream(&mut state, &prepared).map_err(attach)?;
    let metrics = Metrics::from_log(&log, &prepared).map_err(attach)?;
    Ok(TargetReport {
        node_id: node_id.to_string(),
        features,
        used_default_prior,
        log,
        metrics,
        normalization,
        stream: prepared,
    })
}

pub fn run_edge_node(
    node_id: &str,
    local_data: &TimeSeries,
    role: &NodeRole,
    channel: &dyn Channel,
) -> Result<NodeReport> {
    match role {
        NodeRole::Historical {
            fitted_at,
            fit,
            normalize,
        } => run_historical(node_id, local_data, *fitted_at, fit, *normalize, channel).map(NodeReport::Historical),
        NodeRole::Target(config) => {
            run_target(node_id, local_data, config, channel).map(|r| NodeReport::Target(Box::new(r)))
        }
    }
}
