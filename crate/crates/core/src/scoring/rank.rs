//! The lexicographic leaderboard.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{ModelSummary, ScoreError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    /// 1-based position.
    pub rank: u32,
    pub summary: ModelSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLeaderboard {
    pub entries: Vec<RankedModel>,
}

/// Higher score first; ties broken by fewer skill calls, then fewer
/// tokens, then shorter runtime, then model name.
pub fn leaderboard_cmp(a: &ModelSummary, b: &ModelSummary) -> Ordering {
    b.mean_score
        .total_cmp(&a.mean_score)
        .then_with(|| a.mean_skill_calls.total_cmp(&b.mean_skill_calls))
        .then_with(|| a.mean_tokens.total_cmp(&b.mean_tokens))
        .then_with(|| a.mean_elapsed_seconds.total_cmp(&b.mean_elapsed_seconds))
        .then_with(|| a.model_ref.cmp(&b.model_ref))
}

pub fn rank_models(summaries: &[ModelSummary]) -> Result<RankedLeaderboard, ScoreError> {
    if summaries.is_empty() {
        return Err(ScoreError::EmptySummary);
    }
    let mut ordered: Vec<ModelSummary> = summaries.to_vec();
    ordered.sort_by(leaderboard_cmp);
    Ok(RankedLeaderboard {
        entries: ordered
            .into_iter()
            .enumerate()
            .map(|(i, summary)| RankedModel { rank: i as u32 + 1, summary })
            .collect(),
    })
}

impl RankedLeaderboard {
    pub fn render_text(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|e| e.summary.model_ref.len())
            .chain(std::iter::once("Model".len()))
            .max()
            .unwrap_or(0);
        let mut out = format!(
            "{:>4}  {:<width$}  {:>9}  {:>11}  {:>12}  {:>10}\n",
            "Rank", "Model", "Score (%)", "Skill Calls", "Tokens", "Elapsed (s)"
        );
        for e in &self.entries {
            out.push_str(&format!(
                "{:>4}  {:<width$}  {:>9.2}  {:>11.2}  {:>12.1}  {:>10.2}\n",
                e.rank,
                e.summary.model_ref,
                e.summary.mean_score,
                e.summary.mean_skill_calls,
                e.summary.mean_tokens,
                e.summary.mean_elapsed_seconds
            ));
        }
        out
    }
}
