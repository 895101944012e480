use serde::{Deserialize, Serialize};

use crate::gp::{TemporalFeature, MIN_FIT_POINTS};
use crate::{Error, Result};

/// A fitted feature as stored by the cloud registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub source_id: String,
    pub feature: TemporalFeature,
    /// Size of the dataset the feature was fitted on.
    pub n_points: usize,
    /// Logical timestamp assigned by the reporting node.
    pub fitted_at: u64,
}

impl FeatureRecord {
    pub fn validate(&self) -> Result<()> {
        let reject = |reason: String| Error::RejectedRecord {
            source_id: self.source_id.clone(),
            reason,
        };
        if self.source_id.is_empty() {
            return Err(reject("empty source_id".into()));
        }
        self.feature.validate().map_err(|e| reject(e.to_string()))?;
        if self.n_points < MIN_FIT_POINTS {
            return Err(reject(format!(
                "n_points {} below the minimum of {MIN_FIT_POINTS}",
                self.n_points
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureQuery {
    pub requester_id: String,
    pub limit: Option<usize>,
}

pub type FeatureResponse = Vec<FeatureRecord>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    Report,
    Query,
    Response,
}

/// One line on the wire.
///
/// Reports and responses carry a full record. A query carries only the
/// requester's id in `source_id` and an optional `limit`. A response to a
/// query is zero or more `response` lines, one per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Message {
    #[serde(rename = "type")]
    pub kind: MessageKind,
    pub source_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

impl Message {
    fn with_record(kind: MessageKind, r: &FeatureRecord) -> Message {
        Message {
            kind,
            source_id: r.source_id.clone(),
            sigma_f: Some(r.feature.sigma_f),
            sigma_l: Some(r.feature.sigma_l),
            sigma_n: Some(r.feature.sigma_n),
            n_points: Some(r.n_points),
            fitted_at: Some(r.fitted_at),
            limit: None,
        }
    }

    pub fn report(record: &FeatureRecord) -> Message {
        Message::with_record(MessageKind::Report, record)
    }

    pub fn response(record: &FeatureRecord) -> Message {
        Message::with_record(MessageKind::Response, record)
    }

    pub fn query(query: &FeatureQuery) -> Message {
        Message {
            kind: MessageKind::Query,
            source_id: query.requester_id.clone(),
            sigma_f: None,
            sigma_l: None,
            sigma_n: None,
            n_points: None,
            fitted_at: None,
            limit: query.limit,
        }
    }

    /// The record carried by a report or response.
    pub fn record(&self) -> Result<FeatureRecord> {
        let missing = |field: &str| Error::Protocol(format!("{:?} message without {field}", self.kind));
        Ok(FeatureRecord {
            source_id: self.source_id.clone(),
            feature: TemporalFeature {
                sigma_f: self.sigma_f.ok_or_else(|| missing("sigma_f"))?,
                sigma_l: self.sigma_l.ok_or_else(|| missing("sigma_l"))?,
                sigma_n: self.sigma_n.ok_or_else(|| missing("sigma_n"))?,
            },
            n_points: self.n_points.ok_or_else(|| missing("n_points"))?,
            fitted_at: self.fitted_at.ok_or_else(|| missing("fitted_at"))?,
        })
    }

    pub fn as_query(&self) -> Result<FeatureQuery> {
        if self.kind != MessageKind::Query {
            return Err(Error::Protocol(format!("expected query, got {:?}", self.kind)));
        }
        Ok(FeatureQuery {
            requester_id: self.source_id.clone(),
            limit: self.limit,
        })
    }

    /// JSON text without the trailing newline.
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("message serialization is infallible")
    }

    pub fn decode(line: &str) -> Result<Message> {
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol(e.to_string()))
    }
}
