//! The repo's canonical record encoding.
//!
//! Every machine-readable artifact uses the same encoding: JSON with
//! struct fields in declaration order and maps as sorted `BTreeMap`s.
//! Multi-record files are JSONL — one complete record per line, UTF-8,
//! LF-terminated, each line parsing standalone. Single-document files
//! (manifests, checkpoints, reports) are pretty-printed JSON written
//! atomically via temp-file-then-rename.
//!
//! Encoding a decoded line reproduces it byte-identically as long as the
//! line was produced by this encoder, which the audit-format acceptance
//! check relies on.

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("encode failure: {0}")]
    Encode(#[source] serde_json::Error),
    #[error("{path}:{line}: bad record: {detail}")]
    Decode {
        path: PathBuf,
        line: usize,
        detail: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> RecordError {
    RecordError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Encode one record as a compact JSON line (no trailing newline).
pub fn encode_line<T: Serialize>(value: &T) -> Result<String, RecordError> {
    serde_json::to_string(value).map_err(RecordError::Encode)
}

/// Decode one record from a JSON line.
pub fn decode_line<T: DeserializeOwned>(line: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(line)
}

/// Read every record of a JSONL file. Blank lines are rejected: a record
/// file either ends cleanly or is corrupt.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let value = decode_line(&line).map_err(|e| RecordError::Decode {
            path: path.to_path_buf(),
            line: idx + 1,
            detail: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Append-only JSONL writer. Each append writes one full line and flushes
/// so a crash never leaves a torn record mid-line.
pub struct JsonlWriter {
    path: PathBuf,
    file: File,
}

impl JsonlWriter {
    pub fn open(path: &Path) -> Result<Self, RecordError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| io_err(path, e))?;
        Ok(JsonlWriter {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn append<T: Serialize>(&mut self, value: &T) -> Result<(), RecordError> {
        let mut line = encode_line(value)?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|()| self.file.flush())
            .map_err(|e| io_err(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), RecordError> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.flush().map_err(|e| io_err(path, e))?;
    tmp.persist(path)
        .map_err(|e| io_err(path, e.error))
        .map(|_| ())
}

/// Write one record as pretty JSON (trailing newline), atomically.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), RecordError> {
    let mut body = serde_json::to_vec_pretty(value).map_err(RecordError::Encode)?;
    body.push(b'\n');
    atomic_write(path, &body)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, RecordError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| RecordError::Decode {
        path: path.to_path_buf(),
        line: 0,
        detail: e.to_string(),
    })
}
