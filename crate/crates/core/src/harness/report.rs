//! The final run report: audit trail summarized for humans and judges.

use serde::{Deserialize, Serialize};

use crate::verify::{CheckStatus, VerificationReport};

use super::audit::{AuditEvent, AuditPayload, Outcome};
use super::run::{Phase, RunMetrics, RunRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skill_id: Option<String>,
    pub outcome: Outcome,
    pub artifacts_written: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Persisted as `report.json` when a run finishes, and rendered to text
/// as the judge's input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    pub task_id: String,
    pub setting: super::run::Setting,
    pub model_ref: String,
    pub repetition: u32,
    pub phase: Phase,
    pub stages: Vec<StageSummary>,
    pub artifacts: Vec<ArtifactRecord>,
    /// Absent when the run failed before the verification phase ran.
    pub verification: Option<VerificationReport>,
    pub metrics: RunMetrics,
    pub errors: Vec<String>,
}

impl RunReport {
    /// Rebuilds the report from the audit trail, so resumed runs report
    /// the full history and not just the final process's slice.
    pub fn from_audit(
        record: &RunRecord,
        events: &[AuditEvent],
        verification: Option<VerificationReport>,
    ) -> Self {
        let mut stages: Vec<StageSummary> = Vec::new();
        let mut artifacts: Vec<ArtifactRecord> = Vec::new();
        let mut errors = Vec::new();
        let mut open_stage: Option<StageSummary> = None;
        for event in events {
            match &event.payload {
                AuditPayload::StageBegin { stage_id, skill_id } => {
                    open_stage = Some(StageSummary {
                        stage_id: stage_id.clone(),
                        skill_id: skill_id.clone(),
                        outcome: Outcome::Failed,
                        artifacts_written: 0,
                    });
                }
                AuditPayload::ArtifactWritten { path, sha256, bytes } => {
                    if let Some(stage) = open_stage.as_mut() {
                        stage.artifacts_written += 1;
                    }
                    match artifacts.iter_mut().find(|a| a.path == *path) {
                        Some(existing) => {
                            existing.sha256 = sha256.clone();
                            existing.bytes = *bytes;
                        }
                        None => artifacts.push(ArtifactRecord {
                            path: path.clone(),
                            sha256: sha256.clone(),
                            bytes: *bytes,
                        }),
                    }
                }
                AuditPayload::StageEnd { stage_id, outcome, .. } => {
                    if let Some(mut stage) = open_stage.take() {
                        if stage.stage_id == *stage_id {
                            stage.outcome = *outcome;
                            stages.push(stage);
                        }
                    }
                }
                AuditPayload::Error { message } => errors.push(message.clone()),
                _ => {}
            }
        }
        RunReport {
            run_id: record.run_id.clone(),
            task_id: record.task_id.clone(),
            setting: record.setting,
            model_ref: record.model_ref.clone(),
            repetition: record.repetition,
            phase: record.phase,
            stages,
            artifacts,
            verification,
            metrics: record.metrics,
            errors,
        }
    }

    /// Plain-text rendering handed to the judge.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Run {} of task {} ({}, model {}, repetition {}): {}\n",
            self.run_id,
            self.task_id,
            self.setting.as_str(),
            self.model_ref,
            self.repetition,
            self.phase.as_str()
        ));
        out.push_str(&format!("\nStages ({}):\n", self.stages.len()));
        for stage in &self.stages {
            let kind = match &stage.skill_id {
                Some(skill) => format!("skill {skill}"),
                None => "ad-hoc command".to_string(),
            };
            out.push_str(&format!(
                "- {} [{kind}]: {}, {} artifact(s)\n",
                stage.stage_id,
                match stage.outcome {
                    Outcome::Ok => "ok",
                    Outcome::Failed => "failed",
                },
                stage.artifacts_written
            ));
        }
        out.push_str(&format!("\nArtifacts ({}):\n", self.artifacts.len()));
        for artifact in &self.artifacts {
            out.push_str(&format!(
                "- {} ({} bytes, sha256 {})\n",
                artifact.path,
                artifact.bytes,
                &artifact.sha256[..12.min(artifact.sha256.len())]
            ));
        }
        match &self.verification {
            None => out.push_str("\nVerification: did not run\n"),
            Some(verification) => {
                let (passed, failed, skipped) = verification.checks.iter().fold(
                    (0u32, 0u32, 0u32),
                    |(p, f, s), check| match check.status {
                        CheckStatus::Pass => (p + 1, f, s),
                        CheckStatus::Fail => (p, f + 1, s),
                        CheckStatus::Skipped => (p, f, s + 1),
                    },
                );
                out.push_str(&format!(
                    "\nVerification: {passed} passed, {failed} failed, {skipped} skipped, {} numeric finding(s)\n",
                    verification.numeric_findings.len()
                ));
                for check in verification.failed_checks() {
                    out.push_str(&format!("- FAIL {}: {}\n", check.target, check.detail));
                }
                for finding in &verification.numeric_findings {
                    out.push_str(&format!(
                        "- non-finite value {} at {} row {} column {}\n",
                        finding.value, finding.path, finding.row, finding.column
                    ));
                }
            }
        }
        if !self.errors.is_empty() {
            out.push_str(&format!("\nErrors ({}):\n", self.errors.len()));
            for error in &self.errors {
                out.push_str(&format!("- {error}\n"));
            }
        }
        out.push_str(&format!(
            "\nMetrics: {} skill call(s), {} token(s), {:.3}s elapsed\n",
            self.metrics.skill_calls, self.metrics.tokens, self.metrics.elapsed_seconds
        ));
        out
    }
}
