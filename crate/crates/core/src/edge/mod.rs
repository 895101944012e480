//! Edge/cloud feature exchange.
//!
//! Historical edge nodes fit a [`TemporalFeature`](crate::TemporalFeature) to
//! their local series and report it to the cloud registry; the target node
//! queries the registry and runs the fusion loop on its own stream. Only the
//! three feature numbers (plus identifiers) ever cross the channel.

mod channel;
mod message;
mod node;
mod registry;
mod simulation;

pub use channel::{Channel, CloudServer, InProcessChannel, NodeTraffic, TrafficStats, FEATURE_PAYLOAD_BYTES};
pub use message::{FeatureQuery, FeatureRecord, FeatureResponse, Message, MessageKind};
pub use node::{
    run_edge_node, run_historical, run_target, ModelSelector, NodeReport, NodeRole, TargetConfig, TargetReport,
    DEFAULT_PRIOR_FEATURE,
};
pub use registry::{Ack, Registry};
pub use simulation::{run_simulation, NodeOutcome, NodeSpec, Scenario, SimulationResult, SourceSpec};
