//! `score`, `rank`, and `report`: result rows to summaries,
//! leaderboards, and the with-versus-no-skills gain table.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use clawharness_core::bench::{
    align_repetitions, common_subset, load_rows, CompletionRule, RepAlignment, RunResultRow,
    SubsetReport,
};
use clawharness_core::harness::Setting;
use clawharness_core::record::{atomic_write, encode_line, write_json_atomic};
use clawharness_core::scoring::{gain_table, rank_models, summarize_model, MeanMode, ModelSummary};
use serde::Serialize;

use crate::commands::{note, parse_setting};
use crate::config::{domain, usage, CliError, GlobalConfig};

/// Flags shared by the three scoring subcommands; every value defaults
/// to the library default when the flag is absent.
pub struct ScoreOpts<'a> {
    pub mean: Option<&'a str>,
    pub completion: Option<&'a str>,
    pub alignment: Option<&'a str>,
}

struct Resolved {
    mean: MeanMode,
    completion: CompletionRule,
    alignment: RepAlignment,
}

fn parse_opt<T>(raw: Option<&str>) -> Result<T, CliError>
where
    T: FromStr + Default,
    T::Err: Display,
{
    match raw {
        None => Ok(T::default()),
        Some(s) => s.parse().map_err(|e| usage(format!("{e}"))),
    }
}

impl Resolved {
    fn from(opts: &ScoreOpts<'_>) -> Result<Self, CliError> {
        Ok(Resolved {
            mean: parse_opt(opts.mean)?,
            completion: parse_opt(opts.completion)?,
            alignment: parse_opt(opts.alignment)?,
        })
    }
}

/// Common subset then repetition alignment, with drops reported on
/// stderr so the table never silently shrinks.
fn aligned(
    config: &GlobalConfig,
    rows: &[RunResultRow],
    completion: CompletionRule,
    alignment: RepAlignment,
) -> Result<SubsetReport, CliError> {
    let subset = common_subset(rows, completion);
    let report = align_repetitions(rows, &subset, alignment);
    for task in &report.dropped {
        note(config, 1, format!("dropped task {task}: not completed by every cell"));
    }
    for (task, reps) in &report.kept_reps {
        note(config, 2, format!("task {task}: keeping {reps} repetition(s) per cell"));
    }
    if report.rows.is_empty() {
        return Err(domain("no scored rows remain after alignment"));
    }
    Ok(report)
}

fn summaries_by_setting(
    rows: &[RunResultRow],
    mode: MeanMode,
) -> Result<BTreeMap<Setting, Vec<ModelSummary>>, CliError> {
    let mut groups: BTreeMap<(Setting, String), Vec<RunResultRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((row.setting, row.model_ref.clone())).or_default().push(row.clone());
    }
    let mut out: BTreeMap<Setting, Vec<ModelSummary>> = BTreeMap::new();
    for ((setting, _model), group) in groups {
        out.entry(setting).or_default().push(summarize_model(&group, mode).map_err(domain)?);
    }
    Ok(out)
}

/// One output record per model and setting.
#[derive(Serialize)]
struct SettingSummary<'a> {
    setting: &'a str,
    #[serde(flatten)]
    summary: &'a ModelSummary,
}

fn emit_lines(
    config: &GlobalConfig,
    lines: Vec<String>,
    out: Option<&Path>,
    what: &str,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut body = lines.join("\n");
            body.push('\n');
            atomic_write(path, body.as_bytes()).map_err(domain)?;
            note(config, 1, format!("wrote {} {what} to {}", lines.len(), path.display()));
        }
        None => {
            for line in &lines {
                println!("{line}");
            }
        }
    }
    Ok(())
}

pub fn score(
    config: &GlobalConfig,
    rows_path: &Path,
    opts: &ScoreOpts<'_>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let resolved = Resolved::from(opts)?;
    let rows = load_rows(rows_path).map_err(domain)?;
    let report = aligned(config, &rows, resolved.completion, resolved.alignment)?;
    let by_setting = summaries_by_setting(&report.rows, resolved.mean)?;
    let mut lines = Vec::new();
    for (setting, summaries) in &by_setting {
        for summary in summaries {
            let record = SettingSummary { setting: setting.as_str(), summary };
            lines.push(encode_line(&record).map_err(domain)?);
        }
    }
    emit_lines(config, lines, out, "summary record(s)")
}

pub fn rank(
    config: &GlobalConfig,
    rows_path: &Path,
    setting_raw: &str,
    opts: &ScoreOpts<'_>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let setting = parse_setting(setting_raw)?;
    let resolved = Resolved::from(opts)?;
    let rows = load_rows(rows_path).map_err(domain)?;
    let report = aligned(config, &rows, resolved.completion, resolved.alignment)?;
    let by_setting = summaries_by_setting(&report.rows, resolved.mean)?;
    let summaries = by_setting.get(&setting).ok_or_else(|| {
        domain(format!("no scored rows for setting {}", setting.as_str()))
    })?;
    let leaderboard = rank_models(summaries).map_err(domain)?;
    print!("{}", leaderboard.render_text());
    if let Some(path) = out {
        let lines = leaderboard
            .entries
            .iter()
            .map(|entry| encode_line(entry).map_err(domain))
            .collect::<Result<Vec<_>, _>>()?;
        let mut body = lines.join("\n");
        body.push('\n');
        atomic_write(path, body.as_bytes()).map_err(domain)?;
        note(config, 1, format!("wrote {} entries to {}", lines.len(), path.display()));
    }
    Ok(())
}

fn load_setting_rows(path: &Path, expected: Setting) -> Result<Vec<RunResultRow>, CliError> {
    let rows = load_rows(path).map_err(domain)?;
    if let Some(stray) = rows.iter().find(|r| r.setting != expected) {
        return Err(domain(format!(
            "{} holds a {} row (task {}, model {}), expected only {}",
            path.display(),
            stray.setting.as_str(),
            stray.task_id,
            stray.model_ref,
            expected.as_str()
        )));
    }
    Ok(rows)
}

pub fn report(
    config: &GlobalConfig,
    with_path: &Path,
    no_path: &Path,
    opts: &ScoreOpts<'_>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let resolved = Resolved::from(opts)?;
    let mut rows = load_setting_rows(with_path, Setting::WithSkills)?;
    rows.extend(load_setting_rows(no_path, Setting::NoSkills)?);
    let aligned_report = aligned(config, &rows, resolved.completion, resolved.alignment)?;
    let by_setting = summaries_by_setting(&aligned_report.rows, resolved.mean)?;
    let with = by_setting
        .get(&Setting::WithSkills)
        .ok_or_else(|| domain("no scored with-skills rows after alignment"))?;
    let without = by_setting
        .get(&Setting::NoSkills)
        .ok_or_else(|| domain("no scored no-skills rows after alignment"))?;
    let table = gain_table(with, without).map_err(domain)?;
    print!("{}", table.render_text());
    if let Some(path) = out {
        write_json_atomic(path, &table).map_err(domain)?;
        note(config, 1, format!("wrote gain table to {}", path.display()));
    }
    Ok(())
}
