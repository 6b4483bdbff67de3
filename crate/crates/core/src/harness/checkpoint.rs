//! Checkpoints: enough state to continue a run after an interrupt.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::record::{read_json, RecordError};
use crate::timeutil::Timestamp;

use super::run::Phase;

/// Saved at every stage and phase boundary. `seq_at_save` is the sequence
/// number of this checkpoint's own `checkpoint_saved` audit event; resume
/// truncates the log past it and continues at `seq_at_save + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub run_id: String,
    pub seq_at_save: u64,
    /// Phase the run enters when resumed from here.
    pub phase: Phase,
    /// Stage ids finished so far, in execution order.
    pub completed_stages: Vec<String>,
    /// Digest of every workspace file at save time, for drift detection.
    pub artifact_digests: BTreeMap<String, String>,
    /// Digest of `manifest.json` at save time.
    pub env_manifest_digest: String,
    pub saved_at: Timestamp,
}

/// Zero-padded so lexicographic order equals numeric order.
pub fn checkpoint_file_name(seq_at_save: u64) -> String {
    format!("ckpt-{seq_at_save:08}.json")
}

/// Newest checkpoint in a run's checkpoint directory, if any.
pub fn latest_checkpoint(dir: &Path) -> Result<Option<(PathBuf, Checkpoint)>, RecordError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(RecordError::Io { path: dir.to_path_buf(), source: e }),
    };
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("ckpt-") && n.ends_with(".json"))
        .collect();
    names.sort();
    let Some(newest) = names.pop() else { return Ok(None) };
    let path = dir.join(newest);
    let checkpoint = read_json(&path)?;
    Ok(Some((path, checkpoint)))
}
