//! Rubric-based scoring of finished runs.
//!
//! A judge reads the run report and returns three dimension scores, each
//! on a 1 to 10 scale: P (plan quality), R (skill and tool use), C
//! (command correctness). Replies must be a JSON object with those keys;
//! a malformed reply earns exactly one re-prompt before the scoring of
//! that run fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::record::read_jsonl;

use super::session::{AgentBackend, AgentSession, Message};
use super::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeScores {
    pub p: f64,
    pub r: f64,
    pub c: f64,
}

/// Identifies the run being judged. `setting` uses the serialized form,
/// `with_skills` or `no_skills`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeKey {
    pub model_ref: String,
    pub task_id: String,
    pub setting: String,
    pub repetition: u32,
}

pub trait Judge: Send + Sync {
    fn judge(&self, key: &JudgeKey, report_text: &str) -> Result<JudgeScores, AgentError>;
}

#[derive(Debug, Clone)]
pub struct RubricDimension {
    pub key: String,
    pub guidance: String,
}

#[derive(Debug, Clone)]
pub struct Rubric {
    pub dimensions: Vec<RubricDimension>,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for Rubric {
    fn default() -> Self {
        let dim = |key: &str, guidance: &str| RubricDimension {
            key: key.to_string(),
            guidance: guidance.to_string(),
        };
        Rubric {
            dimensions: vec![
                dim("P", "plan quality: coverage of the task objectives and sound ordering"),
                dim("R", "skill and tool use: appropriate selection and reasonable invocation"),
                dim("C", "command correctness: steps ran as intended and artifacts check out"),
            ],
            scale_min: 1.0,
            scale_max: 10.0,
        }
    }
}

impl Rubric {
    pub fn prompt(&self) -> String {
        let mut out = String::from(
            "You grade one agent run from its execution report. Score each dimension on a scale \
             from ",
        );
        out.push_str(&format!("{} to {}. Decimals are allowed.\n", self.scale_min, self.scale_max));
        for dim in &self.dimensions {
            out.push_str(&format!("- {}: {}\n", dim.key, dim.guidance));
        }
        let keys: Vec<&str> = self.dimensions.iter().map(|d| d.key.as_str()).collect();
        out.push_str(&format!(
            "Reply with a single JSON object with exactly the keys {}, for example \
             {{\"P\": 7, \"R\": 6, \"C\": 8}}.",
            keys.join(", ")
        ));
        out
    }

    fn reprompt(&self) -> String {
        let keys: Vec<&str> = self.dimensions.iter().map(|d| d.key.as_str()).collect();
        format!(
            "That reply was not usable. Respond with only a JSON object with the numeric keys \
             {}, each between {} and {}.",
            keys.join(", "),
            self.scale_min,
            self.scale_max
        )
    }
}

/// Pulls the scores out of a judge reply. The reply may wrap the JSON
/// object in prose; the outermost braces are taken as the object.
fn parse_scores(text: &str, rubric: &Rubric) -> Result<JudgeScores, AgentError> {
    let format_err = |detail: String| AgentError::JudgeFormat { detail };
    let start = text
        .find('{')
        .ok_or_else(|| format_err("reply contains no JSON object".to_string()))?;
    let end = text
        .rfind('}')
        .ok_or_else(|| format_err("reply contains no JSON object".to_string()))?;
    let value: serde_json::Value = serde_json::from_str(&text[start..=end])
        .map_err(|e| format_err(format!("reply is not valid JSON: {e}")))?;
    let object = value
        .as_object()
        .ok_or_else(|| format_err("reply JSON is not an object".to_string()))?;
    let mut by_key = BTreeMap::new();
    for dim in &rubric.dimensions {
        let found = object
            .get(&dim.key)
            .or_else(|| object.get(&dim.key.to_lowercase()))
            .ok_or_else(|| format_err(format!("reply is missing dimension {}", dim.key)))?;
        let score = found
            .as_f64()
            .ok_or_else(|| format_err(format!("dimension {} is not a number", dim.key)))?;
        if !score.is_finite() || score < rubric.scale_min || score > rubric.scale_max {
            return Err(format_err(format!(
                "dimension {}={} outside [{}, {}]",
                dim.key, score, rubric.scale_min, rubric.scale_max
            )));
        }
        by_key.insert(dim.key.as_str(), score);
    }
    Ok(JudgeScores { p: by_key["P"], r: by_key["R"], c: by_key["C"] })
}

/// Runs one judging conversation: rubric prompt plus report, one attempt,
/// and a single re-prompt if the first reply is malformed.
pub fn judge_with_backend(
    backend: &dyn AgentBackend,
    judge_model_ref: &str,
    report_text: &str,
    rubric: &Rubric,
) -> Result<JudgeScores, AgentError> {
    let mut session = AgentSession::new(judge_model_ref, 2);
    let turn = session
        .complete(backend, vec![Message::system(rubric.prompt()), Message::user(report_text)])?;
    match parse_scores(&turn.text, rubric) {
        Ok(scores) => Ok(scores),
        Err(first) => {
            match session.complete(backend, vec![Message::user(rubric.reprompt())]) {
                Ok(retry) => parse_scores(&retry.text, rubric),
                // Keep the format error when the retry cannot even run.
                Err(_) => Err(first),
            }
        }
    }
}

/// Judge that scores with a live model through a backend.
pub struct LlmJudge {
    backend: Arc<dyn AgentBackend>,
    judge_model_ref: String,
    rubric: Rubric,
}

impl LlmJudge {
    pub fn new(backend: Arc<dyn AgentBackend>, judge_model_ref: impl Into<String>) -> Self {
        LlmJudge { backend, judge_model_ref: judge_model_ref.into(), rubric: Rubric::default() }
    }
}

impl Judge for LlmJudge {
    fn judge(&self, _key: &JudgeKey, report_text: &str) -> Result<JudgeScores, AgentError> {
        judge_with_backend(self.backend.as_ref(), &self.judge_model_ref, report_text, &self.rubric)
    }
}

/// One fixed scoring row: the same scores apply to every repetition of a
/// model, task, and setting cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeTableRow {
    pub model_ref: String,
    pub task_id: String,
    pub setting: String,
    pub p: f64,
    pub r: f64,
    pub c: f64,
}

/// Deterministic judge backed by a table of fixed scores, for benchmark
/// fixtures whose expected aggregates are computed by hand.
#[derive(Debug)]
pub struct ScriptedJudgeTable {
    entries: BTreeMap<String, JudgeScores>,
}

fn table_key(model_ref: &str, task_id: &str, setting: &str) -> String {
    format!("{model_ref}|{task_id}|{setting}")
}

impl ScriptedJudgeTable {
    pub fn new(rows: Vec<JudgeTableRow>) -> Result<Self, AgentError> {
        let mut entries = BTreeMap::new();
        for row in rows {
            for (key, score) in [("P", row.p), ("R", row.r), ("C", row.c)] {
                if !score.is_finite() || !(1.0..=10.0).contains(&score) {
                    return Err(AgentError::JudgeFormat {
                        detail: format!(
                            "table row {}: dimension {key}={score} outside [1, 10]",
                            table_key(&row.model_ref, &row.task_id, &row.setting)
                        ),
                    });
                }
            }
            let key = table_key(&row.model_ref, &row.task_id, &row.setting);
            let scores = JudgeScores { p: row.p, r: row.r, c: row.c };
            if entries.insert(key.clone(), scores).is_some() {
                return Err(AgentError::Protocol {
                    detail: format!("duplicate judge table row {key}"),
                });
            }
        }
        Ok(ScriptedJudgeTable { entries })
    }

    /// Loads a table from JSONL, one [`JudgeTableRow`] per line.
    pub fn from_file(path: &Path) -> Result<Self, AgentError> {
        ScriptedJudgeTable::new(read_jsonl(path)?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Judge for ScriptedJudgeTable {
    fn judge(&self, key: &JudgeKey, _report_text: &str) -> Result<JudgeScores, AgentError> {
        let lookup = table_key(&key.model_ref, &key.task_id, &key.setting);
        self.entries.get(&lookup).copied().ok_or_else(|| AgentError::Protocol {
            detail: format!("no judge table row for {lookup}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::scripted::{FixtureTurn, ScriptedBackend};

    fn reply(text: &str) -> FixtureTurn {
        FixtureTurn { text: text.into(), tool_calls: vec![], usage: Default::default() }
    }

    #[test]
    fn parses_scores_with_surrounding_prose_and_decimals() {
        let backend =
            ScriptedBackend::new("j", vec![reply("Here you go: {\"P\": 8, \"R\": 7.5, \"C\": 9}")]);
        let scores = judge_with_backend(&backend, "judge", "report", &Rubric::default()).unwrap();
        assert_eq!(scores, JudgeScores { p: 8.0, r: 7.5, c: 9.0 });
    }

    #[test]
    fn lowercase_keys_are_accepted() {
        let backend = ScriptedBackend::new("j", vec![reply("{\"p\": 1, \"r\": 10, \"c\": 5.25}")]);
        let scores = judge_with_backend(&backend, "judge", "report", &Rubric::default()).unwrap();
        assert_eq!(scores, JudgeScores { p: 1.0, r: 10.0, c: 5.25 });
    }

    #[test]
    fn out_of_range_score_fails_after_the_single_reprompt() {
        let backend = ScriptedBackend::new("j", vec![reply("{\"P\": 11, \"R\": 7, \"C\": 9}")]);
        let err = judge_with_backend(&backend, "judge", "report", &Rubric::default()).unwrap_err();
        assert!(matches!(err, AgentError::JudgeFormat { detail } if detail.contains("P=11")));
    }

    #[test]
    fn one_reprompt_can_recover_a_malformed_reply() {
        let backend = ScriptedBackend::new(
            "j",
            vec![reply("sorry, no scores"), reply("{\"P\": 6, \"R\": 6, \"C\": 6}")],
        );
        let scores = judge_with_backend(&backend, "judge", "report", &Rubric::default()).unwrap();
        assert_eq!(scores, JudgeScores { p: 6.0, r: 6.0, c: 6.0 });
        assert_eq!(backend.requests_seen().len(), 2);
    }

    #[test]
    fn second_malformed_reply_reports_the_latest_error() {
        let backend = ScriptedBackend::new(
            "j",
            vec![reply("no scores"), reply("{\"P\": 6, \"R\": \"high\", \"C\": 6}")],
        );
        let err = judge_with_backend(&backend, "judge", "report", &Rubric::default()).unwrap_err();
        assert!(matches!(err, AgentError::JudgeFormat { detail } if detail.contains("R is not a number")));
    }

    #[test]
    fn missing_dimension_is_named() {
        let backend = ScriptedBackend::new("j", vec![reply("{\"P\": 6, \"R\": 6}")]);
        let err = judge_with_backend(&backend, "judge", "report", &Rubric::default()).unwrap_err();
        assert!(matches!(err, AgentError::JudgeFormat { detail } if detail.contains("missing dimension C")));
    }

    #[test]
    fn scripted_table_looks_up_by_model_task_setting() {
        let table = ScriptedJudgeTable::new(vec![JudgeTableRow {
            model_ref: "m1".into(),
            task_id: "T001".into(),
            setting: "with_skills".into(),
            p: 7.0,
            r: 8.0,
            c: 6.5,
        }])
        .unwrap();
        let mut key = JudgeKey {
            model_ref: "m1".into(),
            task_id: "T001".into(),
            setting: "with_skills".into(),
            repetition: 1,
        };
        assert_eq!(table.judge(&key, "").unwrap(), JudgeScores { p: 7.0, r: 8.0, c: 6.5 });
        key.repetition = 2;
        assert_eq!(table.judge(&key, "").unwrap(), JudgeScores { p: 7.0, r: 8.0, c: 6.5 });
        key.setting = "no_skills".into();
        let err = table.judge(&key, "").unwrap_err();
        assert!(matches!(err, AgentError::Protocol { detail } if detail.contains("no_skills")));
    }

    #[test]
    fn table_rejects_duplicates_and_out_of_range_rows() {
        let row = JudgeTableRow {
            model_ref: "m".into(),
            task_id: "T".into(),
            setting: "with_skills".into(),
            p: 5.0,
            r: 5.0,
            c: 5.0,
        };
        let dup = ScriptedJudgeTable::new(vec![row.clone(), row.clone()]).unwrap_err();
        assert!(matches!(dup, AgentError::Protocol { detail } if detail.contains("duplicate")));
        let bad = JudgeTableRow { c: 0.5, ..row };
        let err = ScriptedJudgeTable::new(vec![bad]).unwrap_err();
        assert!(matches!(err, AgentError::JudgeFormat { detail } if detail.contains("C=0.5")));
    }
}
