//! `run`, `resume`, and `verify`: the single-run lifecycle.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clawharness_core::agent::{
    AgentBackend, HttpBackend, HttpBackendConfig, ScriptedBackend,
};
use clawharness_core::bench::load_tasks;
use clawharness_core::bench::TaskSpec;
use clawharness_core::harness::{
    resume_run, run_task, HarnessConfig, RunCompletion, RunRecord, RunRequest, Setting,
};
use clawharness_core::record::read_json;
use clawharness_core::verify::{
    verify_workspace, CheckKind, CheckStatus, ValueClass, VerificationReport,
};

use crate::commands::{note, registry::load_valid_registry};
use crate::config::{api_base, api_key, domain, usage, CliError, GlobalConfig};

pub struct RunArgs<'a> {
    pub task: &'a str,
    pub setting: Setting,
    pub turns: Option<&'a Path>,
    pub api_base: Option<&'a str>,
    pub stop_after: Option<usize>,
    pub repetition: u32,
    pub tasks: Option<&'a Path>,
    pub fixtures: Option<&'a Path>,
}

pub fn tasks_dir(config: &GlobalConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).unwrap_or_else(|| config.bench_root.join("tasks"))
}

pub fn fixtures_dir(config: &GlobalConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).unwrap_or_else(|| config.bench_root.join("fixtures"))
}

pub fn find_task(dir: &Path, task_id: &str) -> Result<TaskSpec, CliError> {
    let tasks = load_tasks(dir).map_err(domain)?;
    tasks
        .into_iter()
        .find(|t| t.id == task_id)
        .ok_or_else(|| domain(format!("no task {task_id} under {}", dir.display())))
}

pub fn harness_config(config: &GlobalConfig) -> HarnessConfig {
    let mut hc = HarnessConfig::new(config.runs_root.clone());
    hc.drift = config.drift;
    hc
}

/// Scripted turns file when given, otherwise the HTTP backend from
/// flags and environment. No backend configured is a usage error.
fn build_backend(
    config: &GlobalConfig,
    turns: Option<&Path>,
    api_flag: Option<&str>,
) -> Result<Arc<dyn AgentBackend>, CliError> {
    if let Some(path) = turns {
        let backend = ScriptedBackend::from_file(path).map_err(domain)?;
        return Ok(Arc::new(backend));
    }
    match api_base(api_flag) {
        Some(base) => {
            note(config, 2, format!("using HTTP backend at {base}"));
            let mut http = HttpBackendConfig::new(base);
            http.api_key = api_key();
            let backend = HttpBackend::new(http).map_err(domain)?;
            Ok(Arc::new(backend))
        }
        None => Err(usage(
            "no agent backend: pass --turns <file> or set CLAWHARNESS_API_BASE (or --api-base)",
        )),
    }
}

fn print_completion(config: &GlobalConfig, completion: RunCompletion) -> Result<(), CliError> {
    match completion {
        RunCompletion::Finished(outcome) => {
            print!("{}", outcome.report.render_text());
            note(config, 1, format!("run directory: {}", outcome.run_dir.display()));
            if outcome.completed() {
                Ok(())
            } else {
                Err(domain(format!("run {} failed", outcome.record.run_id)))
            }
        }
        RunCompletion::Interrupted { run_id, completed_stages, .. } => {
            println!(
                "run {run_id} interrupted after {completed_stages} completed stage(s); \
                 resume with: clawharness resume {run_id}"
            );
            Ok(())
        }
    }
}

pub fn run(config: &GlobalConfig, args: RunArgs<'_>) -> Result<(), CliError> {
    let task = find_task(&tasks_dir(config, args.tasks), args.task)?;
    let graph = load_valid_registry(&config.registry_root, false)?;
    let backend = build_backend(config, args.turns, args.api_base)?;
    let fixtures = fixtures_dir(config, args.fixtures);
    let completion = run_task(
        &harness_config(config),
        RunRequest {
            graph: &graph,
            task: &task,
            fixtures_root: &fixtures,
            backend: backend.as_ref(),
            model_ref: &config.model_ref,
            setting: args.setting,
            repetition: args.repetition,
            stop_after_stages: args.stop_after,
        },
    )
    .map_err(domain)?;
    print_completion(config, completion)
}

/// Reads the run's own record to learn which task it belongs to, so
/// resuming needs nothing beyond the run id.
fn record_of(config: &GlobalConfig, run_id: &str) -> Result<RunRecord, CliError> {
    let path = config.runs_root.join(run_id).join("run.json");
    if !path.exists() {
        return Err(domain(format!("no run {run_id} under {}", config.runs_root.display())));
    }
    read_json(&path).map_err(domain)
}

pub fn resume(
    config: &GlobalConfig,
    run_id: &str,
    stop_after: Option<usize>,
    tasks: Option<&Path>,
    fixtures: Option<&Path>,
) -> Result<(), CliError> {
    let record = record_of(config, run_id)?;
    let task = find_task(&tasks_dir(config, tasks), &record.task_id)?;
    let fixtures = fixtures_dir(config, fixtures);
    let completion =
        resume_run(&harness_config(config), &task, &fixtures, run_id, stop_after)
            .map_err(domain)?;
    print_completion(config, completion)
}

fn kind_name(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::ExpectedArtifact => "artifact",
        CheckKind::NumericScreen => "numeric",
        CheckKind::Checksum => "checksum",
        CheckKind::Qc => "qc",
        CheckKind::ToolProbe => "tool",
    }
}

fn render_verification(report: &VerificationReport) -> String {
    let mut out = String::new();
    for check in &report.checks {
        let status = match check.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skipped",
        };
        out.push_str(&format!(
            "{status} {} {}: {}\n",
            kind_name(check.kind),
            check.target,
            check.detail
        ));
    }
    for finding in &report.numeric_findings {
        let class = match finding.value_class {
            ValueClass::Nan => "nan",
            ValueClass::PosInf => "+inf",
            ValueClass::NegInf => "-inf",
        };
        out.push_str(&format!(
            "non-finite {} ({class}) at {} row {} column {}\n",
            finding.value, finding.path, finding.row, finding.column
        ));
    }
    out
}

/// Re-runs workspace verification for a finished or failed run. Reads
/// only; the run directory is never modified.
pub fn verify(config: &GlobalConfig, run_id: &str, tasks: Option<&Path>) -> Result<(), CliError> {
    let record = record_of(config, run_id)?;
    let task = find_task(&tasks_dir(config, tasks), &record.task_id)?;
    let mut spec = task.verification();
    let planned: Vec<_> =
        record.plan.iter().flat_map(|stage| stage.outputs.iter().cloned()).collect();
    spec.merge_expected(&planned);
    let workspace = config.runs_root.join(run_id).join(&record.workspace);
    let report = verify_workspace(&spec, &workspace).map_err(domain)?;
    print!("{}", render_verification(&report));
    let failed = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
    println!(
        "verification {}: {} check(s), {failed} failed, {} numeric finding(s)",
        if report.overall { "passed" } else { "failed" },
        report.checks.len(),
        report.numeric_findings.len()
    );
    if report.overall {
        Ok(())
    } else {
        Err(domain(format!("verification failed for run {run_id}")))
    }
}
