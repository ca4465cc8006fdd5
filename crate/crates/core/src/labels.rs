//! Analyst labels: an append-only JSONL log with an in-memory index.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::classify::{InvalidEnum, SubType, Trick};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub has_concealment: bool,
    pub subtypes: BTreeSet<SubType>,
    pub tricks: BTreeSet<Trick>,
    #[serde(default)]
    pub note: String,
    pub timestamp: DateTime<Utc>,
}

/// Label as submitted by a client, before enum validation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelInput {
    pub has_concealment: bool,
    #[serde(default)]
    pub subtypes: Vec<String>,
    #[serde(default)]
    pub tricks: Vec<String>,
    #[serde(default)]
    pub note: String,
}

impl LabelInput {
    pub fn into_record(self, id: &str, timestamp: DateTime<Utc>) -> Result<LabelRecord, InvalidEnum> {
        let subtypes = self.subtypes.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        let tricks = self.tricks.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        Ok(LabelRecord {
            id: id.to_string(),
            has_concealment: self.has_concealment,
            subtypes,
            tricks,
            note: self.note,
            timestamp,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LabelLogError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: corrupt label record: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug)]
pub struct LabelLog {
    path: PathBuf,
    file: File,
    history: BTreeMap<String, Vec<LabelRecord>>,
}

impl LabelLog {
    /// Opens or creates the log and rebuilds the index. A final line
    /// without its newline is a torn write and is cut off.
    pub fn open(path: &Path) -> Result<LabelLog, LabelLogError> {
        let io = |source| LabelLogError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;

        let complete = match text.rfind('\n') {
            Some(i) => i + 1,
            None => 0,
        };
        if complete < text.len() {
            file.set_len(complete as u64).map_err(io)?;
            file.sync_data().map_err(io)?;
        }

        let mut history: BTreeMap<String, Vec<LabelRecord>> = BTreeMap::new();
        for (i, line) in text[..complete].lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: LabelRecord = serde_json::from_str(line).map_err(|source| LabelLogError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })?;
            history.entry(rec.id.clone()).or_default().push(rec);
        }
        Ok(LabelLog {
            path: path.to_path_buf(),
            file,
            history,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends and syncs to disk before indexing, so a returned record is
    /// durable.
    pub fn append(&mut self, record: LabelRecord) -> Result<&LabelRecord, LabelLogError> {
        let io = |source| LabelLogError::Io {
            path: self.path.clone(),
            source,
        };
        let mut line = serde_json::to_vec(&record).map_err(|e| io(e.into()))?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(io)?;
        self.file.flush().map_err(io)?;
        self.file.sync_data().map_err(io)?;
        let entries = self.history.entry(record.id.clone()).or_default();
        entries.push(record);
        Ok(entries.last().expect("just pushed"))
    }

    pub fn latest(&self, id: &str) -> Option<&LabelRecord> {
        self.history.get(id).and_then(|h| h.last())
    }

    pub fn history(&self, id: &str) -> &[LabelRecord] {
        self.history.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn latest_all(&self) -> impl Iterator<Item = &LabelRecord> {
        self.history.values().filter_map(|h| h.last())
    }

    pub fn is_labeled(&self, id: &str) -> bool {
        self.history.contains_key(id)
    }

    pub fn labeled_count(&self) -> usize {
        self.history.len()
    }
}
