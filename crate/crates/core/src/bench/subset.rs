//! Cross-model comparability: which tasks count, and how many
//! repetitions of each cell are kept.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::harness::Setting;

use super::RunResultRow;

/// When a (model, setting) pair counts as having completed a task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionRule {
    /// At least one scored repetition.
    #[default]
    AnyRep,
    /// Every repetition scored.
    AllReps,
}

impl FromStr for CompletionRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "any_rep" => Ok(CompletionRule::AnyRep),
            "all_reps" => Ok(CompletionRule::AllReps),
            other => Err(format!("unknown completion rule {other:?}, expected any_rep or all_reps")),
        }
    }
}

/// Whether the kept repetition count is chosen per task or once
/// globally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepAlignment {
    #[default]
    PerTask,
    Global,
}

impl FromStr for RepAlignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per_task" => Ok(RepAlignment::PerTask),
            "global" => Ok(RepAlignment::Global),
            other => Err(format!("unknown alignment {other:?}, expected per_task or global")),
        }
    }
}

fn models_of(rows: &[RunResultRow]) -> BTreeSet<&str> {
    rows.iter().map(|r| r.model_ref.as_str()).collect()
}

fn settings_of(rows: &[RunResultRow]) -> BTreeSet<Setting> {
    rows.iter().map(|r| r.setting).collect()
}

/// Tasks every model completed in every setting present in `rows`.
pub fn common_subset(rows: &[RunResultRow], rule: CompletionRule) -> BTreeSet<String> {
    let models = models_of(rows);
    let settings = settings_of(rows);
    let tasks: BTreeSet<&str> = rows.iter().map(|r| r.task_id.as_str()).collect();
    tasks
        .into_iter()
        .filter(|task| {
            models.iter().all(|model| {
                settings.iter().all(|setting| {
                    let cell: Vec<&RunResultRow> = rows
                        .iter()
                        .filter(|r| {
                            r.task_id == *task
                                && r.model_ref == *model
                                && r.setting == *setting
                        })
                        .collect();
                    match rule {
                        CompletionRule::AnyRep => cell.iter().any(|r| r.scored()),
                        CompletionRule::AllReps => {
                            !cell.is_empty() && cell.iter().all(|r| r.scored())
                        }
                    }
                })
            })
        })
        .map(str::to_string)
        .collect()
}

/// The aligned, scoring-ready slice of a result set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    /// Retained tasks, sorted.
    pub tasks: Vec<String>,
    /// Tasks dropped because some cell had no scored repetition.
    pub dropped: Vec<String>,
    /// Repetitions kept per task.
    pub kept_reps: BTreeMap<String, u32>,
    /// Scored rows only, truncated per cell, in (task, model, setting,
    /// repetition) order.
    pub rows: Vec<RunResultRow>,
}

/// Keeps, for every cell of each retained task, the earliest `m` scored
/// repetitions, where `m` is the minimum scored-repetition count over
/// that task's cells (or over all tasks with global alignment).
pub fn align_repetitions(
    rows: &[RunResultRow],
    task_subset: &BTreeSet<String>,
    alignment: RepAlignment,
) -> SubsetReport {
    let models = models_of(rows);
    let settings = settings_of(rows);
    let mut min_reps: BTreeMap<String, u32> = BTreeMap::new();
    let mut dropped: Vec<String> = Vec::new();
    for task in task_subset {
        let mut m = u32::MAX;
        for model in &models {
            for setting in &settings {
                let scored = rows
                    .iter()
                    .filter(|r| {
                        r.task_id == *task
                            && r.model_ref == *model
                            && r.setting == *setting
                            && r.scored()
                    })
                    .count() as u32;
                m = m.min(scored);
            }
        }
        if m == 0 || m == u32::MAX {
            dropped.push(task.clone());
        } else {
            min_reps.insert(task.clone(), m);
        }
    }
    if alignment == RepAlignment::Global {
        if let Some(global) = min_reps.values().copied().min() {
            for m in min_reps.values_mut() {
                *m = global;
            }
        }
    }
    let mut kept: Vec<RunResultRow> = Vec::new();
    for (task, &m) in &min_reps {
        for model in &models {
            for setting in &settings {
                let mut cell: Vec<&RunResultRow> = rows
                    .iter()
                    .filter(|r| {
                        r.task_id == *task
                            && r.model_ref == *model
                            && r.setting == *setting
                            && r.scored()
                    })
                    .collect();
                cell.sort_by_key(|r| r.repetition_index);
                kept.extend(cell.into_iter().take(m as usize).cloned());
            }
        }
    }
    kept.sort_by(|a, b| {
        (&a.task_id, &a.model_ref, a.setting.as_str(), a.repetition_index).cmp(&(
            &b.task_id,
            &b.model_ref,
            b.setting.as_str(),
            b.repetition_index,
        ))
    });
    SubsetReport {
        tasks: min_reps.keys().cloned().collect(),
        dropped,
        kept_reps: min_reps,
        rows: kept,
    }
}
