//! The model × task × setting × repetition run matrix.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentBackend, Judge, JudgeKey};
use crate::harness::{run_task, HarnessConfig, RunCompletion, RunMetrics, RunRequest, Setting};
use crate::record::{atomic_write, JsonlWriter};
use crate::scoring::{weighted_score, WeightedScore};
use crate::skill::SkillGraph;

use super::{BenchError, TaskSpec};

/// Judge scores for one run, on the judge's own 1-10 scale.
pub use crate::agent::JudgeScores;

/// One cell result. `scores` and `weighted` are both absent when the run
/// failed or the judge could not score it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResultRow {
    pub model_ref: String,
    pub task_id: String,
    pub setting: Setting,
    /// 1-based repetition index.
    pub repetition_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<JudgeScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted: Option<WeightedScore>,
    pub metrics: RunMetrics,
    pub run_id: String,
}

impl RunResultRow {
    pub fn scored(&self) -> bool {
        self.scores.is_some()
    }

    fn key(&self) -> CellKey {
        (
            self.model_ref.clone(),
            self.task_id.clone(),
            self.setting,
            self.repetition_index,
        )
    }
}

type CellKey = (String, String, Setting, u32);

/// Supplies the agent backend for one matrix cell. Scripted fixtures key
/// backends by exactly these three coordinates.
pub trait BackendProvider: Sync {
    fn backend(
        &self,
        model_ref: &str,
        task_id: &str,
        setting: Setting,
    ) -> Result<Arc<dyn AgentBackend>, BenchError>;
}

pub struct MatrixSpec<'a> {
    pub tasks: &'a [TaskSpec],
    pub models: &'a [String],
    pub settings: &'a [Setting],
    /// Repetitions per cell, 1-based indices 1..=repetitions.
    pub repetitions: u32,
    pub workers: usize,
    /// Execute at most this many new cells, then stop (resumable).
    pub max_cells: Option<usize>,
}

#[derive(Debug)]
pub struct MatrixOutcome {
    /// Every row present after this invocation, in canonical order
    /// (task, model, setting, repetition).
    pub rows: Vec<RunResultRow>,
    pub executed: usize,
    pub skipped: usize,
    /// Cells still missing (the invocation hit `max_cells`).
    pub remaining: usize,
}

/// Runs every cell of the matrix that `results_path` does not already
/// hold a row for, appending each finished row immediately. Per-cell
/// failures become unscored rows, never errors.
pub fn run_matrix(
    config: &HarnessConfig,
    graph: &SkillGraph,
    fixtures_root: &Path,
    backends: &dyn BackendProvider,
    judge: &dyn Judge,
    spec: &MatrixSpec<'_>,
    results_path: &Path,
) -> Result<MatrixOutcome, BenchError> {
    let existing = read_rows_tolerant(results_path)?;
    let done: BTreeSet<CellKey> = existing.iter().map(RunResultRow::key).collect();
    let mut pending: Vec<(&TaskSpec, &String, Setting, u32)> = Vec::new();
    let mut skipped = 0usize;
    for task in spec.tasks {
        for model in spec.models {
            for &setting in spec.settings {
                for rep in 1..=spec.repetitions {
                    let key = (model.clone(), task.id.clone(), setting, rep);
                    if done.contains(&key) {
                        skipped += 1;
                    } else {
                        pending.push((task, model, setting, rep));
                    }
                }
            }
        }
    }
    let total_pending = pending.len();
    if let Some(max) = spec.max_cells {
        pending.truncate(max);
    }
    let remaining = total_pending - pending.len();

    if let Some(parent) = results_path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| BenchError::Io { path: parent.to_path_buf(), source: e })?;
    }
    let mut writer = JsonlWriter::open(results_path)?;
    let mut rows = existing;
    let executed = pending.len();
    let next_cell = AtomicUsize::new(0);
    let workers = spec.workers.max(1).min(pending.len().max(1));
    let (tx, rx) = mpsc::channel::<Result<RunResultRow, BenchError>>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let pending = &pending;
            let next_cell = &next_cell;
            scope.spawn(move || loop {
                let i = next_cell.fetch_add(1, Ordering::SeqCst);
                let Some(&(task, model, setting, rep)) = pending.get(i) else { break };
                let row = run_cell(
                    config,
                    graph,
                    fixtures_root,
                    backends,
                    judge,
                    task,
                    model,
                    setting,
                    rep,
                );
                if tx.send(row).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for row in rx {
            let row = row?;
            writer.append(&row)?;
            rows.push(row);
        }
        Ok::<(), BenchError>(())
    })?;
    rows.sort_by(|a, b| {
        (&a.task_id, &a.model_ref, a.setting.as_str(), a.repetition_index).cmp(&(
            &b.task_id,
            &b.model_ref,
            b.setting.as_str(),
            b.repetition_index,
        ))
    });
    Ok(MatrixOutcome { rows, executed, skipped, remaining })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    config: &HarnessConfig,
    graph: &SkillGraph,
    fixtures_root: &Path,
    backends: &dyn BackendProvider,
    judge: &dyn Judge,
    task: &TaskSpec,
    model: &str,
    setting: Setting,
    rep: u32,
) -> Result<RunResultRow, BenchError> {
    let backend = backends.backend(model, &task.id, setting)?;
    let request = RunRequest {
        graph,
        task,
        fixtures_root,
        backend: backend.as_ref(),
        model_ref: model,
        setting,
        repetition: rep,
        stop_after_stages: None,
    };
    let completion = run_task(config, request)?;
    let RunCompletion::Finished(outcome) = completion else {
        unreachable!("no stage cap was set");
    };
    let mut row = RunResultRow {
        model_ref: model.to_string(),
        task_id: task.id.clone(),
        setting,
        repetition_index: rep,
        scores: None,
        weighted: None,
        metrics: outcome.record.metrics,
        run_id: outcome.record.run_id.clone(),
    };
    if outcome.completed() {
        let key = JudgeKey {
            model_ref: model.to_string(),
            task_id: task.id.clone(),
            setting: setting.as_str().to_string(),
            repetition: rep,
        };
        // A judge failure leaves the row unscored; the run itself stands.
        if let Ok(scores) = judge.judge(&key, &outcome.report.render_text()) {
            if let Ok(weighted) = weighted_score(scores.p, scores.r, scores.c) {
                row.scores = Some(scores);
                row.weighted = Some(weighted);
            }
        }
    }
    Ok(row)
}

/// Reads rows back, dropping a torn trailing line (a previous process
/// may have died mid-append). A malformed line anywhere else is real
/// corruption and stays fatal.
fn read_rows_tolerant(path: &Path) -> Result<Vec<RunResultRow>, BenchError> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(BenchError::Io { path: path.to_path_buf(), source: e }),
    };
    let lines: Vec<&str> = text.lines().collect();
    let mut rows = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str::<RunResultRow>(line) {
            Ok(row) => rows.push(row),
            Err(_) if i + 1 == lines.len() => {
                let kept = rows
                    .iter()
                    .map(|row| serde_json::to_string(row).expect("encodable row"))
                    .map(|mut s| {
                        s.push('\n');
                        s
                    })
                    .collect::<String>();
                atomic_write(path, kept.as_bytes())?;
                break;
            }
            Err(e) => {
                return Err(BenchError::Record(crate::record::RecordError::Decode {
                    path: path.to_path_buf(),
                    line: i + 1,
                    detail: e.to_string(),
                }))
            }
        }
    }
    Ok(rows)
}

/// Loads a finished result set without tolerance for damage.
pub fn load_rows(path: &Path) -> Result<Vec<RunResultRow>, BenchError> {
    Ok(crate::record::read_jsonl(path)?)
}
