//! Per-model aggregation of aligned result rows.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::RunResultRow;

use super::{weighted_score, ScoreError};

/// How row values roll up to the model level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanMode {
    /// Mean over repetitions per task, then unweighted mean over tasks.
    #[default]
    TwoStage,
    /// Single mean over all rows.
    Pooled,
}

impl FromStr for MeanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "two_stage" => Ok(MeanMode::TwoStage),
            "pooled" => Ok(MeanMode::Pooled),
            other => Err(format!("unknown mean mode {other:?}, expected two_stage or pooled")),
        }
    }
}

/// One task's repetitions for one model and setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAggregate {
    pub task_id: String,
    /// Mean percentage score over repetitions.
    pub mean_score: f64,
    /// Population variance of the percentage score over repetitions.
    pub score_variance: f64,
    pub n_reps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_ref: String,
    pub mean_score: f64,
    /// Population variance of the percentage score over all rows.
    pub score_variance: f64,
    pub mean_skill_calls: f64,
    pub mean_tokens: f64,
    pub mean_elapsed_seconds: f64,
    pub n_rows: u32,
    pub per_task: Vec<TaskAggregate>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Rolls repetition values up to one number per the mode: task means
/// averaged, or one pooled mean.
fn roll_up(per_task: &BTreeMap<&str, Vec<f64>>, mode: MeanMode) -> f64 {
    match mode {
        MeanMode::TwoStage => {
            let task_means: Vec<f64> = per_task.values().map(|v| mean(v)).collect();
            mean(&task_means)
        }
        MeanMode::Pooled => {
            let all: Vec<f64> = per_task.values().flatten().copied().collect();
            mean(&all)
        }
    }
}

/// Summarizes aligned rows for one model in one setting. Every row must
/// be scored and share the same model and setting.
pub fn summarize_model(rows: &[RunResultRow], mode: MeanMode) -> Result<ModelSummary, ScoreError> {
    let first = rows.first().ok_or(ScoreError::EmptySummary)?;
    for row in rows {
        if row.model_ref != first.model_ref {
            return Err(ScoreError::MixedRows {
                field: "model_ref",
                left: first.model_ref.clone(),
                right: row.model_ref.clone(),
            });
        }
        if row.setting != first.setting {
            return Err(ScoreError::MixedRows {
                field: "setting",
                left: first.setting.as_str().to_string(),
                right: row.setting.as_str().to_string(),
            });
        }
    }
    let mut scores: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut skill_calls: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut tokens: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut elapsed: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for row in rows {
        let s100 = match (&row.weighted, &row.scores) {
            (Some(weighted), _) => weighted.s100,
            (None, Some(judged)) => weighted_score(judged.p, judged.r, judged.c)?.s100,
            (None, None) => {
                return Err(ScoreError::UnscoredRow { run_id: row.run_id.clone() })
            }
        };
        scores.entry(&row.task_id).or_default().push(s100);
        skill_calls.entry(&row.task_id).or_default().push(row.metrics.skill_calls as f64);
        tokens.entry(&row.task_id).or_default().push(row.metrics.tokens as f64);
        elapsed.entry(&row.task_id).or_default().push(row.metrics.elapsed_seconds);
    }
    let per_task: Vec<TaskAggregate> = scores
        .iter()
        .map(|(task_id, reps)| TaskAggregate {
            task_id: task_id.to_string(),
            mean_score: mean(reps),
            score_variance: population_variance(reps),
            n_reps: reps.len() as u32,
        })
        .collect();
    let all_scores: Vec<f64> = scores.values().flatten().copied().collect();
    Ok(ModelSummary {
        model_ref: first.model_ref.clone(),
        mean_score: roll_up(&scores, mode),
        score_variance: population_variance(&all_scores),
        mean_skill_calls: roll_up(&skill_calls, mode),
        mean_tokens: roll_up(&tokens, mode),
        mean_elapsed_seconds: roll_up(&elapsed, mode),
        n_rows: rows.len() as u32,
        per_task,
    })
}
