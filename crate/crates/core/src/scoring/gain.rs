//! Absolute and normalized skill gain, and the per-model gain report.

use serde::{Deserialize, Serialize};

use super::{ModelSummary, ScoreError};

/// Gain of the with-skills setting over the no-skills baseline for one
/// model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainResult {
    pub s_with: f64,
    pub s_no: f64,
    /// Absolute gain in percentage points.
    pub a_abs: f64,
    /// Normalized gain: headroom-relative when positive, baseline-
    /// relative when negative, clipped to [-1, 1].
    pub g: f64,
}

fn check_score(value: f64) -> Result<(), ScoreError> {
    if !value.is_finite() || !(0.0..=100.0).contains(&value) {
        return Err(ScoreError::ScoreOutOfRange { value });
    }
    Ok(())
}

/// An improvement is measured against the available headroom
/// `100 - s_no`; a regression against the baseline itself. Zero delta is
/// zero gain even at a perfect baseline.
pub fn normalized_gain(s_with: f64, s_no: f64) -> Result<GainResult, ScoreError> {
    check_score(s_with)?;
    check_score(s_no)?;
    let a_abs = s_with - s_no;
    let g = if a_abs == 0.0 {
        0.0
    } else if a_abs > 0.0 {
        if s_no >= 100.0 {
            return Err(ScoreError::UndefinedGain { s_with, s_no });
        }
        a_abs / (100.0 - s_no)
    } else {
        if s_no <= 0.0 {
            return Err(ScoreError::UndefinedGain { s_with, s_no });
        }
        a_abs / s_no
    };
    Ok(GainResult { s_with, s_no, a_abs, g: g.clamp(-1.0, 1.0) })
}

/// One model's line in the gain report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub model_ref: String,
    #[serde(flatten)]
    pub gain: GainResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTable {
    /// Case-insensitive model order, as leaderboards conventionally
    /// print it.
    pub rows: Vec<GainRow>,
    /// Mean absolute gain over all models.
    pub mean_a_abs: f64,
}

/// Pairs each model's with-skills and no-skills summaries. A model
/// present in only one set is an input error.
pub fn gain_table(
    with: &[ModelSummary],
    without: &[ModelSummary],
) -> Result<GainTable, ScoreError> {
    for summary in without {
        if !with.iter().any(|s| s.model_ref == summary.model_ref) {
            return Err(ScoreError::LopsidedModel { model_ref: summary.model_ref.clone() });
        }
    }
    let mut rows = Vec::with_capacity(with.len());
    for s_with in with {
        let s_no = without
            .iter()
            .find(|s| s.model_ref == s_with.model_ref)
            .ok_or_else(|| ScoreError::LopsidedModel { model_ref: s_with.model_ref.clone() })?;
        rows.push(GainRow {
            model_ref: s_with.model_ref.clone(),
            gain: normalized_gain(s_with.mean_score, s_no.mean_score)?,
        });
    }
    rows.sort_by(|a, b| {
        (a.model_ref.to_lowercase(), &a.model_ref)
            .cmp(&(b.model_ref.to_lowercase(), &b.model_ref))
    });
    let mean_a_abs =
        rows.iter().map(|r| r.gain.a_abs).sum::<f64>() / rows.len().max(1) as f64;
    Ok(GainTable { rows, mean_a_abs })
}

impl GainTable {
    /// Fixed-width text: scores at 2 decimals, g at 4, and a mean
    /// footer. Display rounding never feeds back into the numbers.
    pub fn render_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.model_ref.len())
            .chain(std::iter::once("Base Model".len()))
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!(
            "{:<width$}  {:>15}  {:>13}  {:>9}  {:>7}\n",
            "Base Model", "With Skills (%)", "No Skills (%)", "A_abs (%)", "g"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<width$}  {:>15.2}  {:>13.2}  {:>9.2}  {:>7.4}\n",
                row.model_ref, row.gain.s_with, row.gain.s_no, row.gain.a_abs, row.gain.g
            ));
        }
        out.push_str(&format!(
            "{:<width$}  {:>15}  {:>13}  {:>9.2}  {:>7}\n",
            "Mean", "", "", self.mean_a_abs, ""
        ));
        out
    }
}
