//! Append-only audit log with gapless sequence numbers.
//!
//! One JSON record per line. Events carry `seq` (starting at 1, no gaps),
//! a millisecond timestamp, the run id, and a tagged payload. Payloads
//! hold no wall-clock durations, so two runs of the same scripted work
//! produce byte-identical logs once `timestamp` and `run_id` are erased.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::record::{atomic_write, decode_line, encode_line, JsonlWriter, RecordError};
use crate::timeutil::Timestamp;
use crate::verify::{CheckKind, CheckStatus};

use super::run::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Failed,
}

/// What changed under a resumed run's feet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftChange {
    /// File present in the checkpoint, content differs now.
    Modified,
    /// File present in the checkpoint, gone now.
    Missing,
    /// File absent from the checkpoint, present now.
    Unexpected,
    /// Environment manifest value differs from the live capture.
    Env,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum AuditPayload {
    PhaseBegin {
        phase: Phase,
    },
    PhaseEnd {
        phase: Phase,
        outcome: Outcome,
    },
    StageBegin {
        stage_id: String,
        skill_id: Option<String>,
    },
    StageEnd {
        stage_id: String,
        outcome: Outcome,
        exit_status: Option<i32>,
    },
    AgentCall {
        call_index: u32,
        prompt_tokens: u64,
        completion_tokens: u64,
    },
    ArtifactWritten {
        path: String,
        sha256: String,
        bytes: u64,
    },
    CheckResult {
        check_kind: CheckKind,
        target: String,
        status: CheckStatus,
        detail: String,
    },
    CheckpointSaved {
        seq_at_save: u64,
        path: String,
    },
    DriftNoted {
        target: String,
        change: DriftChange,
        expected: String,
        actual: String,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub run_id: String,
    #[serde(flatten)]
    pub payload: AuditPayload,
}

/// Writer half of the log. Sequence numbers are assigned on append and
/// every line is flushed before the call returns.
pub struct AuditLog {
    writer: JsonlWriter,
    run_id: String,
    next_seq: u64,
}

impl AuditLog {
    /// Opens a fresh log for a new run; sequencing starts at 1.
    pub fn create(path: &Path, run_id: &str) -> Result<Self, RecordError> {
        Ok(AuditLog { writer: JsonlWriter::open(path)?, run_id: run_id.to_string(), next_seq: 1 })
    }

    /// Reopens the log of an interrupted run, dropping any events after
    /// `keep_through` (lines a crash may have written past the checkpoint
    /// being resumed from). Returns the log positioned to continue and
    /// the last sequence number actually retained.
    pub fn resume(path: &Path, run_id: &str, keep_through: u64) -> Result<(Self, u64), RecordError> {
        let events = read_audit(path)?;
        let mut kept = Vec::new();
        let mut last_seq = 0;
        for event in &events {
            if event.seq > keep_through {
                break;
            }
            kept.push(encode_line(event)?);
            last_seq = event.seq;
        }
        let mut body = kept.join("\n");
        if !body.is_empty() {
            body.push('\n');
        }
        atomic_write(path, body.as_bytes())?;
        let log = AuditLog {
            writer: JsonlWriter::open(path)?,
            run_id: run_id.to_string(),
            next_seq: last_seq + 1,
        };
        Ok((log, last_seq))
    }

    /// Sequence number the next append will use.
    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn append(&mut self, payload: AuditPayload) -> Result<AuditEvent, RecordError> {
        let event = AuditEvent {
            seq: self.next_seq,
            timestamp: Timestamp::now(),
            run_id: self.run_id.clone(),
            payload,
        };
        self.writer.append(&event)?;
        self.next_seq += 1;
        Ok(event)
    }
}

pub fn read_audit(path: &Path) -> Result<Vec<AuditEvent>, RecordError> {
    crate::record::read_jsonl(path)
}

/// Audit lines with `timestamp` and `run_id` blanked, for comparing runs
/// that did the same work at different times. Keys are reordered
/// alphabetically; apply to both sides before comparing.
pub fn normalized_audit_lines(path: &Path) -> Result<Vec<String>, RecordError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RecordError::Io { path: path.to_path_buf(), source: e })?;
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut value: serde_json::Value = decode_line(line).map_err(|e| RecordError::Decode {
            path: path.to_path_buf(),
            line: idx + 1,
            detail: e.to_string(),
        })?;
        if let Some(obj) = value.as_object_mut() {
            obj.insert("timestamp".to_string(), serde_json::Value::String(String::new()));
            obj.insert("run_id".to_string(), serde_json::Value::String(String::new()));
        }
        lines.push(value.to_string());
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_payloads() -> Vec<AuditPayload> {
        vec![
            AuditPayload::PhaseBegin { phase: Phase::Decompose },
            AuditPayload::AgentCall { call_index: 1, prompt_tokens: 120, completion_tokens: 48 },
            AuditPayload::PhaseEnd { phase: Phase::Decompose, outcome: Outcome::Ok },
            AuditPayload::StageBegin {
                stage_id: "fsl-tool".into(),
                skill_id: Some("fsl-tool".into()),
            },
            AuditPayload::ArtifactWritten {
                path: "derivatives/roi.csv".into(),
                sha256: "ab".repeat(32),
                bytes: 42,
            },
            AuditPayload::CheckResult {
                check_kind: CheckKind::ExpectedArtifact,
                target: "derivatives/*.csv".into(),
                status: CheckStatus::Pass,
                detail: "slot roi matched 1 file(s)".into(),
            },
            AuditPayload::StageEnd {
                stage_id: "fsl-tool".into(),
                outcome: Outcome::Ok,
                exit_status: Some(0),
            },
            AuditPayload::CheckpointSaved {
                seq_at_save: 8,
                path: "checkpoints/ckpt-00000008.json".into(),
            },
            AuditPayload::DriftNoted {
                target: "derivatives/roi.csv".into(),
                change: DriftChange::Modified,
                expected: "aa".repeat(32),
                actual: "bb".repeat(32),
            },
            AuditPayload::Error { message: "step exited 3, expected 0".into() },
        ]
    }

    #[test]
    fn sequences_are_gapless_from_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.jsonl");
        let mut log = AuditLog::create(&path, "run-x").unwrap();
        for payload in sample_payloads() {
            log.append(payload).unwrap();
        }
        let events = read_audit(&path).unwrap();
        let seqs: Vec<u64> = events.iter().map(|e| e.seq).collect();
        assert_eq!(seqs, (1..=10).collect::<Vec<u64>>());
    }

    #[test]
    fn every_payload_kind_round_trips_to_identical_bytes() {
        for payload in sample_payloads() {
            let event = AuditEvent {
                seq: 7,
                timestamp: Timestamp::from_millis(1_735_689_600_123),
                run_id: "run-y".into(),
                payload,
            };
            let line = encode_line(&event).unwrap();
            let back: AuditEvent = decode_line(&line).unwrap();
            assert_eq!(back, event);
            assert_eq!(encode_line(&back).unwrap(), line);
        }
    }

    #[test]
    fn kind_tag_and_field_order_are_stable() {
        let event = AuditEvent {
            seq: 1,
            timestamp: Timestamp::from_millis(0),
            run_id: "r".into(),
            payload: AuditPayload::PhaseBegin { phase: Phase::Execute },
        };
        let line = encode_line(&event).unwrap();
        assert_eq!(
            line,
            "{\"seq\":1,\"timestamp\":\"1970-01-01T00:00:00.000Z\",\"run_id\":\"r\",\
             \"kind\":\"phase_begin\",\"payload\":{\"phase\":\"execute\"}}"
        );
    }

    #[test]
    fn resume_truncates_orphan_lines_and_continues_numbering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.jsonl");
        let mut log = AuditLog::create(&path, "run-z").unwrap();
        for payload in sample_payloads() {
            log.append(payload).unwrap();
        }
        drop(log);
        let (mut log, last) = AuditLog::resume(&path, "run-z", 4).unwrap();
        assert_eq!(last, 4);
        assert_eq!(log.next_seq(), 5);
        log.append(AuditPayload::Error { message: "resumed".into() }).unwrap();
        let events = read_audit(&path).unwrap();
        assert_eq!(events.len(), 5);
        assert_eq!(events.last().unwrap().seq, 5);
        assert!(matches!(events.last().unwrap().payload, AuditPayload::Error { .. }));
    }

    #[test]
    fn normalization_erases_identity_but_keeps_payload() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        let mut log_a = AuditLog::create(&a, "run-a").unwrap();
        let mut log_b = AuditLog::create(&b, "run-b").unwrap();
        for payload in sample_payloads() {
            log_a.append(payload.clone()).unwrap();
            log_b.append(payload).unwrap();
        }
        assert_eq!(normalized_audit_lines(&a).unwrap(), normalized_audit_lines(&b).unwrap());
        let raw_a = std::fs::read_to_string(&a).unwrap();
        let raw_b = std::fs::read_to_string(&b).unwrap();
        assert_ne!(raw_a, raw_b);
    }
}
