use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use super::message::{FeatureQuery, FeatureRecord, FeatureResponse};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Ack {
    pub record: FeatureRecord,
    /// A record with the same `(source_id, fitted_at)` was already stored.
    pub duplicate: bool,
}

/// Cloud-side feature store. Safe for concurrent reports and queries.
///
/// With a backing file, every accepted record is appended as one JSON line
/// and the file is replayed on open.
#[derive(Debug, Default)]
pub struct Registry {
    records: RwLock<Vec<FeatureRecord>>,
    file: Option<(PathBuf, Mutex<File>)>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Registry {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open (or create) an append-only registry file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut records: Vec<FeatureRecord> = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io(path))?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io(path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: FeatureRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::Protocol(format!("{}:{}: {e}", path.display(), i + 1)))?;
                if !records
                    .iter()
                    .any(|r| r.source_id == rec.source_id && r.fitted_at == rec.fitted_at)
                {
                    records.push(rec);
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io(path))?;
        Ok(Registry {
            records: RwLock::new(records),
            file: Some((path.to_path_buf(), Mutex::new(file))),
        })
    }

    /// Store a record. Idempotent per `(source_id, fitted_at)`.
    pub fn report(&self, record: FeatureRecord) -> Result<Ack> {
        record.validate()?;
        let mut records = self.records.write().expect("registry lock poisoned");
        if let Some(existing) = records
            .iter()
            .find(|r| r.source_id == record.source_id && r.fitted_at == record.fitted_at)
        {
            return Ok(Ack {
                record: existing.clone(),
                duplicate: true,
            });
        }
        if let Some((path, file)) = &self.file {
            let mut line = serde_json::to_string(&record).map_err(|e| Error::Protocol(e.to_string()))?;
            line.push('\n');
            let mut f = file.lock().expect("registry file lock poisoned");
            f.write_all(line.as_bytes()).map_err(io(path))?;
            f.flush().map_err(io(path))?;
        }
        records.push(record.clone());
        Ok(Ack {
            record,
            duplicate: false,
        })
    }

    /// Records of every other node, newest `fitted_at` first (ties by
    /// `source_id`), truncated to `limit`.
    pub fn query(&self, query: &FeatureQuery) -> FeatureResponse {
        let mut out: Vec<FeatureRecord> = self
            .records
            .read()
            .expect("registry lock poisoned")
            .iter()
            .filter(|r| r.source_id != query.requester_id)
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            b.fitted_at
                .cmp(&a.fitted_at)
                .then_with(|| a.source_id.cmp(&b.source_id))
        });
        if let Some(limit) = query.limit {
            out.truncate(limit);
        }
        out
    }

    /// All stored records in insertion order.
    pub fn records(&self) -> Vec<FeatureRecord> {
        self.records.read().expect("registry lock poisoned").clone()
    }

    pub fn len(&self) -> usize {
        self.records.read().expect("registry lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
