//! Newline-delimited JSON append-only log, one per system domain.
//!
//! Each line is `{"kind":"entity"|"event","seq":N,...}`. Sequences start at 1
//! and increase by exactly one per line.

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EntityRecord, InteractionEvent};

pub const LOG_FILE: &str = "log.ndjson";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogRecord {
    Entity(EntityRecord),
    Event(InteractionEvent),
}

impl LogRecord {
    pub fn sequence(&self) -> u64 {
        match self {
            LogRecord::Entity(r) => r.sequence,
            LogRecord::Event(e) => e.sequence,
        }
    }
}

/// How hard an append pushes data towards the disk before acknowledging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Durability {
    /// Flushed to the OS; survives a process kill.
    #[default]
    Flush,
    /// `fsync` per record; survives power loss.
    Sync,
}

pub struct LogWriter {
    path: PathBuf,
    out: BufWriter<File>,
    durability: Durability,
}

impl LogWriter {
    /// Opens `path` for appending, truncating it to `valid_len` first so a
    /// torn tail from an earlier crash is overwritten.
    pub fn open(path: &Path, valid_len: u64, durability: Durability) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        if file.metadata()?.len() > valid_len {
            file.set_len(valid_len)?;
        }
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file), durability })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &LogRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record).map_err(io::Error::other)?;
        line.push(b'\n');
        self.out.write_all(&line)?;
        self.out.flush()?;
        if self.durability == Durability::Sync {
            self.out.get_ref().sync_data()?;
        }
        Ok(())
    }
}

/// Where and why reading stopped early.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corruption {
    pub offset: u64,
    pub reason: String,
}

pub struct LogContents {
    pub records: Vec<LogRecord>,
    /// Byte length of the valid prefix.
    pub valid_len: u64,
    pub corruption: Option<Corruption>,
}

/// Reads every valid record, stopping at the first truncated, unparsable or
/// out-of-sequence line.
pub fn read_log(path: &Path) -> io::Result<LogContents> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut records = Vec::new();
    let mut offset = 0usize;
    let mut corruption = None;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        let Some(nl) = rest.iter().position(|b| *b == b'\n') else {
            corruption = Some(Corruption { offset: offset as u64, reason: "truncated final record".into() });
            break;
        };
        let line = &rest[..nl];
        let parsed = serde_json::from_slice::<LogRecord>(line)
            .map_err(|e| e.to_string())
            .and_then(|r| {
                let expected = records.len() as u64 + 1;
                if r.sequence() == expected {
                    Ok(r)
                } else {
                    Err(format!("sequence {} where {expected} was expected", r.sequence()))
                }
            });
        match parsed {
            Ok(r) => records.push(r),
            Err(reason) => {
                corruption = Some(Corruption { offset: offset as u64, reason });
                break;
            }
        }
        offset += nl + 1;
    }
    Ok(LogContents { records, valid_len: offset as u64, corruption })
}
