use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::message::{Message, MessageKind};
use super::registry::Registry;
use crate::Result;

/// Size of the feature payload itself: three `f64`s.
pub const FEATURE_PAYLOAD_BYTES: usize = 3 * std::mem::size_of::<f64>();

/// The cloud end of the protocol: one request line in, response lines out.
#[derive(Debug, Default)]
pub struct CloudServer {
    registry: Registry,
}

impl CloudServer {
    pub fn new(registry: Registry) -> Self {
        CloudServer { registry }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// A report is acknowledged by echoing the stored record as a `response`
    /// line; a query is answered with one `response` line per record.
    pub fn handle(&self, request: &Message) -> Result<Vec<Message>> {
        match request.kind {
            MessageKind::Report => {
                let ack = self.registry.report(request.record()?)?;
                Ok(vec![Message::response(&ack.record)])
            }
            MessageKind::Query => Ok(self
                .registry
                .query(&request.as_query()?)
                .iter()
                .map(Message::response)
                .collect()),
            MessageKind::Response => Err(crate::Error::Protocol(
                "the cloud does not accept response messages".into(),
            )),
        }
    }

    pub fn handle_line(&self, line: &str) -> Result<Vec<String>> {
        let request = Message::decode(line)?;
        Ok(self.handle(&request)?.iter().map(Message::encode).collect())
    }
}

/// Request/response transport between an edge node and the cloud.
pub trait Channel: Send + Sync {
    fn exchange(&self, request: &Message) -> Result<Vec<Message>>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTraffic {
    pub sent_messages: usize,
    pub received_messages: usize,
    /// Serialized bytes including the line terminator.
    pub sent_bytes: usize,
    pub received_bytes: usize,
    /// Feature payload carried: [`FEATURE_PAYLOAD_BYTES`] per record.
    pub sent_payload_bytes: usize,
    pub received_payload_bytes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficStats {
    pub per_node: BTreeMap<String, NodeTraffic>,
}

impl TrafficStats {
    pub fn total_bytes(&self) -> usize {
        self.per_node.values().map(|t| t.sent_bytes + t.received_bytes).sum()
    }
}

fn carries_record(m: &Message) -> bool {
    m.sigma_f.is_some() && m.sigma_l.is_some() && m.sigma_n.is_some()
}

/// Same-process transport. Every message still goes through its JSON line
/// encoding, which is what gets counted and recorded.
#[derive(Debug)]
pub struct InProcessChannel {
    server: CloudServer,
    traffic: Mutex<(TrafficStats, Vec<String>)>,
}

impl InProcessChannel {
    pub fn new(server: CloudServer) -> Self {
        InProcessChannel {
            server,
            traffic: Mutex::new((TrafficStats::default(), Vec::new())),
        }
    }

    pub fn server(&self) -> &CloudServer {
        &self.server
    }

    pub fn stats(&self) -> TrafficStats {
        self.traffic.lock().expect("traffic lock poisoned").0.clone()
    }

    /// Every line that crossed the channel, in order.
    pub fn transcript(&self) -> Vec<String> {
        self.traffic.lock().expect("traffic lock poisoned").1.clone()
    }
}

impl Channel for InProcessChannel {
    fn exchange(&self, request: &Message) -> Result<Vec<Message>> {
        let line = request.encode();
        let replies = self.server.handle_line(&line)?;
        let decoded = replies.iter().map(|l| Message::decode(l)).collect::<Result<Vec<_>>>()?;

        let mut guard = self.traffic.lock().expect("traffic lock poisoned");
        let (stats, transcript) = &mut *guard;
        let node = stats.per_node.entry(request.source_id.clone()).or_default();
        node.sent_messages += 1;
        node.sent_bytes += line.len() + 1;
        if carries_record(request) {
            node.sent_payload_bytes += FEATURE_PAYLOAD_BYTES;
        }
        for (text, msg) in replies.iter().zip(&decoded) {
            node.received_messages += 1;
            node.received_bytes += text.len() + 1;
            if carries_record(msg) {
                node.received_payload_bytes += FEATURE_PAYLOAD_BYTES;
            }
        }
        transcript.push(line);
        transcript.extend(replies);
        Ok(decoded)
    }
}
