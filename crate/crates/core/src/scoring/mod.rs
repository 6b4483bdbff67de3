//! Scores, aggregates, gains, and the leaderboard.
//!
//! All numbers are computed at full f64 precision; rendering rounds for
//! display only and never feeds back into comparisons.

mod aggregate;
mod gain;
mod rank;
mod weighted;

pub use aggregate::{summarize_model, MeanMode, ModelSummary, TaskAggregate};
pub use gain::{gain_table, normalized_gain, GainResult, GainRow, GainTable};
pub use rank::{leaderboard_cmp, rank_models, RankedLeaderboard, RankedModel};
pub use weighted::{weighted_score, WeightedScore};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("dimension {dimension} is {value}, outside [1,10]")]
    DimensionOutOfRange { dimension: &'static str, value: f64 },
    #[error("score {value} is outside [0,100]")]
    ScoreOutOfRange { value: f64 },
    #[error("gain is undefined for s_with={s_with}, s_no={s_no}")]
    UndefinedGain { s_with: f64, s_no: f64 },
    #[error("no rows to summarize")]
    EmptySummary,
    #[error("run {run_id} has no scores; summaries need fully scored rows")]
    UnscoredRow { run_id: String },
    #[error("rows mix {field} values {left:?} and {right:?}")]
    MixedRows { field: &'static str, left: String, right: String },
    #[error("model {model_ref:?} is present in only one summary set")]
    LopsidedModel { model_ref: String },
}
