//! Artifact verification for finished runs.
//!
//! A [`VerificationSpec`] says what a correct workspace looks like:
//! expected artifact slots, globs whose tabular files get screened for
//! non-finite numbers, an optional checksum manifest, and per-pattern QC
//! rules. [`verify_workspace`] evaluates all of it and returns a
//! [`VerificationReport`] whose check entries and numeric findings are in
//! a deterministic order.

mod checks;

pub use checks::verify_workspace;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pathglob::PatternError;
use crate::skill::ArtifactSlot;
use crate::timeutil::Timestamp;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("bad qc rule {0:?}: {1}")]
    BadRule(String, String),
    #[error("bad checksum manifest line {line} in {path}: {detail}")]
    BadManifest { path: PathBuf, line: usize, detail: String },
}

/// What to verify in one run workspace.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationSpec {
    /// Artifact slots that must (or may) exist after the run.
    #[serde(default)]
    pub expected: Vec<ArtifactSlot>,
    /// Globs selecting tabular files to screen for NaN and infinite
    /// values.
    #[serde(default)]
    pub numeric_screen: Vec<String>,
    /// Workspace-relative path of a digest manifest: one JSON record
    /// `{"path": ..., "sha256": ...}` per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum_manifest: Option<String>,
    /// Content rules applied to files matching each pattern.
    #[serde(default)]
    pub qc_rules: Vec<QcRule>,
}

impl VerificationSpec {
    /// Merges extra expected slots (for example the output slots of every
    /// planned skill). First occurrence of a pattern wins, except that a
    /// required slot upgrades an optional one.
    pub fn merge_expected(&mut self, extra: &[ArtifactSlot]) {
        for slot in extra {
            match self.expected.iter_mut().find(|s| s.pattern == slot.pattern) {
                Some(existing) => existing.required |= slot.required,
                None => self.expected.push(slot.clone()),
            }
        }
    }
}

/// One QC rule: `rule` applied to every file matching `pattern`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcRule {
    pub pattern: String,
    pub rule: QcKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QcKind {
    Nonempty,
    ParsesAsTable,
    FieldPresent(String),
}

impl fmt::Display for QcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QcKind::Nonempty => write!(f, "nonempty"),
            QcKind::ParsesAsTable => write!(f, "parses_as_table"),
            QcKind::FieldPresent(name) => write!(f, "field_present:{name}"),
        }
    }
}

impl FromStr for QcKind {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, VerifyError> {
        if s == "nonempty" {
            return Ok(QcKind::Nonempty);
        }
        if s == "parses_as_table" {
            return Ok(QcKind::ParsesAsTable);
        }
        if let Some(name) = s.strip_prefix("field_present:") {
            if name.is_empty() {
                return Err(VerifyError::BadRule(s.to_string(), "empty field name".to_string()));
            }
            return Ok(QcKind::FieldPresent(name.to_string()));
        }
        Err(VerifyError::BadRule(
            s.to_string(),
            "expected nonempty, parses_as_table, or field_present:<name>".to_string(),
        ))
    }
}

impl Serialize for QcKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QcKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    ExpectedArtifact,
    NumericScreen,
    Checksum,
    Qc,
    /// Emitted by the harness for environment tool probes, never by
    /// workspace verification.
    ToolProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub kind: CheckKind,
    /// Pattern or workspace-relative path the check looked at.
    pub target: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueClass {
    Nan,
    PosInf,
    NegInf,
}

/// One non-finite cell in a screened table. Rows are 1-based and include
/// the header row; columns are 1-based field positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericFinding {
    pub path: String,
    pub row: u64,
    pub column: u64,
    /// Header name for the column, when the file has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub value: String,
    pub value_class: ValueClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    pub numeric_findings: Vec<NumericFinding>,
    pub overall: bool,
    pub produced_at: Timestamp,
}

impl VerificationReport {
    /// A file with findings also fails its screening check, so `overall`
    /// is equivalently the absence of failed checks.
    pub fn new(checks: Vec<CheckEntry>, numeric_findings: Vec<NumericFinding>) -> Self {
        let overall = numeric_findings.is_empty()
            && checks.iter().all(|c| c.status != CheckStatus::Fail);
        VerificationReport { checks, numeric_findings, overall, produced_at: Timestamp::now() }
    }

    /// Skipped checks do not count against the verdict.
    pub fn passed(&self) -> bool {
        self.overall
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qc_kind_string_forms_round_trip() {
        for text in ["nonempty", "parses_as_table", "field_present:mean_bold"] {
            let kind: QcKind = text.parse().unwrap();
            assert_eq!(kind.to_string(), text);
        }
        assert!("field_present:".parse::<QcKind>().is_err());
        assert!("sorted".parse::<QcKind>().is_err());
    }

    #[test]
    fn merge_expected_upgrades_optional_slots() {
        let slot = |pattern: &str, required: bool| ArtifactSlot {
            name: pattern.replace('/', "-"),
            pattern: pattern.to_string(),
            kind: crate::skill::ArtifactKind::Other,
            required,
        };
        let mut spec = VerificationSpec {
            expected: vec![slot("out/a.txt", false)],
            ..VerificationSpec::default()
        };
        spec.merge_expected(&[slot("out/a.txt", true), slot("out/b.txt", false)]);
        assert_eq!(spec.expected.len(), 2);
        assert!(spec.expected[0].required);
        assert!(!spec.expected[1].required);
    }

    #[test]
    fn overall_reflects_failures_and_findings() {
        let report = VerificationReport::new(Vec::new(), Vec::new());
        assert!(report.passed());
        let skipped = CheckEntry {
            kind: CheckKind::Qc,
            target: "x".into(),
            status: CheckStatus::Skipped,
            detail: String::new(),
        };
        assert!(VerificationReport::new(vec![skipped.clone()], Vec::new()).passed());
        let finding = NumericFinding {
            path: "t.csv".into(),
            row: 2,
            column: 1,
            field: None,
            value: "nan".into(),
            value_class: ValueClass::Nan,
        };
        assert!(!VerificationReport::new(vec![skipped], vec![finding]).passed());
    }
}
