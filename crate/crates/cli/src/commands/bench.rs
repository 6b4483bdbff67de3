//! `bench run`: drives the model x task x setting x repetition matrix
//! against scripted or live backends with a scripted judge.

use std::path::{Path, PathBuf};

use clawharness_core::agent::{HttpBackendConfig, ScriptedJudgeTable};
use clawharness_core::bench::{
    load_tasks, run_matrix, BackendProvider, HttpProvider, MatrixSpec, TurnsDirProvider,
};
use clawharness_core::harness::Setting;

use crate::commands::{note, parse_settings_list, registry::load_valid_registry};
use crate::commands::runs::{fixtures_dir, harness_config, tasks_dir};
use crate::config::{api_base, api_key, domain, usage, CliError, GlobalConfig};

pub struct BenchRunArgs<'a> {
    pub tasks: Option<&'a Path>,
    pub models: &'a [String],
    pub reps: u32,
    pub settings: &'a str,
    pub fixtures: Option<&'a Path>,
    pub agents: Option<&'a Path>,
    pub api_base: Option<&'a str>,
    pub judge_table: Option<&'a Path>,
    pub results: Option<&'a Path>,
    pub max_cells: Option<usize>,
}

/// Scripted turn fixtures when the agents directory exists, otherwise
/// the HTTP backend. A dangling explicit --agents path is an error.
fn build_provider(
    config: &GlobalConfig,
    agents: Option<&Path>,
    api_flag: Option<&str>,
) -> Result<Box<dyn BackendProvider>, CliError> {
    let default_dir = config.bench_root.join("agents");
    let dir = match agents {
        Some(path) => {
            if !path.is_dir() {
                return Err(usage(format!("agents directory {} does not exist", path.display())));
            }
            Some(path.to_path_buf())
        }
        None if default_dir.is_dir() => Some(default_dir),
        None => None,
    };
    if let Some(dir) = dir {
        note(config, 2, format!("scripted agents from {}", dir.display()));
        return Ok(Box::new(TurnsDirProvider::new(dir)));
    }
    match api_base(api_flag) {
        Some(base) => {
            note(config, 2, format!("live agents via {base}"));
            let mut http = HttpBackendConfig::new(base);
            http.api_key = api_key();
            Ok(Box::new(HttpProvider::new(http).map_err(domain)?))
        }
        None => Err(usage(
            "no agent fixtures directory and no CLAWHARNESS_API_BASE (or --api-base) configured",
        )),
    }
}

pub fn run(config: &GlobalConfig, args: BenchRunArgs<'_>) -> Result<(), CliError> {
    if args.reps < 1 {
        return Err(usage("--reps must be at least 1"));
    }
    if args.models.iter().any(|m| m.trim().is_empty()) {
        return Err(usage("--models contains an empty model reference"));
    }
    let settings: Vec<Setting> = parse_settings_list(args.settings)?;
    let tasks = load_tasks(&tasks_dir(config, args.tasks)).map_err(domain)?;
    if tasks.is_empty() {
        return Err(domain(format!(
            "no .task files under {}",
            tasks_dir(config, args.tasks).display()
        )));
    }
    let graph = load_valid_registry(&config.registry_root, false)?;
    let provider = build_provider(config, args.agents, args.api_base)?;

    let judge_path: PathBuf = args
        .judge_table
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.bench_root.join("judge.scores"));
    if !judge_path.exists() {
        return Err(domain(format!("judge table {} does not exist", judge_path.display())));
    }
    let judge = ScriptedJudgeTable::from_file(&judge_path).map_err(domain)?;

    let results: PathBuf = args
        .results
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.bench_root.join("rows.jsonl"));
    let fixtures = fixtures_dir(config, args.fixtures);
    let spec = MatrixSpec {
        tasks: &tasks,
        models: args.models,
        settings: &settings,
        repetitions: args.reps,
        workers: config.workers,
        max_cells: args.max_cells,
    };
    note(
        config,
        1,
        format!(
            "matrix: {} task(s) x {} model(s) x {} setting(s) x {} rep(s), {} worker(s)",
            tasks.len(),
            args.models.len(),
            settings.len(),
            args.reps,
            config.workers
        ),
    );
    let outcome = run_matrix(
        &harness_config(config),
        &graph,
        &fixtures,
        provider.as_ref(),
        &judge,
        &spec,
        &results,
    )
    .map_err(domain)?;
    let scored = outcome.rows.iter().filter(|r| r.scored()).count();
    println!(
        "executed {} cell(s), skipped {} existing, {} remaining; {} row(s) total ({} scored) in {}",
        outcome.executed,
        outcome.skipped,
        outcome.remaining,
        outcome.rows.len(),
        scored,
        results.display()
    );
    Ok(())
}
