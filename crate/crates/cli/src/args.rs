//! Command line surface. Every flag carries help text; a test walks the
//! clap tree to keep the parser and its documentation in lockstep.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "clawharness",
    version,
    about = "Skill-graph execution harness and benchmark driver",
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every subcommand. Each value resolves as
/// flag, then CLAWHARNESS_* environment variable, then config file,
/// then built-in default.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Config file (TOML). Default: ./clawharness.toml when present.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Skill registry directory (one .skill manifest per skill).
    #[arg(long, global = true, value_name = "DIR")]
    pub registry: Option<PathBuf>,
    /// Directory holding one subdirectory per run.
    #[arg(long, global = true, value_name = "DIR")]
    pub runs_root: Option<PathBuf>,
    /// Benchmark root: tasks/, fixtures/, agents/, judge and result files.
    #[arg(long, global = true, value_name = "DIR")]
    pub bench_root: Option<PathBuf>,
    /// Model reference recorded with runs and used for live backends.
    #[arg(long, global = true, value_name = "REF")]
    pub model: Option<String>,
    /// Worker threads for the benchmark matrix (minimum 1).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Checkpoint drift policy on resume: warn or strict.
    #[arg(long, global = true, value_name = "POLICY")]
    pub drift: Option<String>,
    /// Diagnostic verbosity on stderr: 0 quiet, 1 normal, 2 debug.
    #[arg(long, global = true, value_name = "LEVEL")]
    pub verbosity: Option<u8>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a skill registry: manifests, layers, edges, acyclicity.
    Validate {
        /// Registry directory. Defaults to the configured registry.
        #[arg(value_name = "REGISTRY_ROOT")]
        registry_root: Option<PathBuf>,
    },
    /// Print the execution order for target skills and their dependencies.
    Plan {
        /// Skill ids to plan for.
        #[arg(value_name = "SKILL_ID", required = true)]
        targets: Vec<String>,
    },
    /// Run one task end to end with an agent.
    Run {
        /// Task id, e.g. T001.
        #[arg(long, value_name = "ID")]
        task: String,
        /// Agent setting: "with" (skill registry) or "no" (bare commands).
        #[arg(long, value_name = "with|no")]
        setting: String,
        /// Scripted agent turns file (JSONL). Without it the HTTP backend
        /// configured via CLAWHARNESS_API_BASE is used.
        #[arg(long, value_name = "FILE")]
        turns: Option<PathBuf>,
        /// Base URL of the completion API for live runs.
        #[arg(long, value_name = "URL")]
        api_base: Option<String>,
        /// Stop cleanly after N completed stages; the run stays resumable.
        #[arg(long, value_name = "N")]
        stop_after: Option<usize>,
        /// Repetition index recorded with the run.
        #[arg(long, value_name = "N", default_value_t = 1)]
        repetition: u32,
        /// Task directory. Default: <bench_root>/tasks.
        #[arg(long, value_name = "DIR")]
        tasks: Option<PathBuf>,
        /// Fixture workspace directory. Default: <bench_root>/fixtures.
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
    },
    /// Continue an interrupted run from its newest checkpoint.
    Resume {
        /// Run id printed when the run was started.
        #[arg(value_name = "RUN_ID")]
        run_id: String,
        /// Stop again after N total completed stages.
        #[arg(long, value_name = "N")]
        stop_after: Option<usize>,
        /// Task directory. Default: <bench_root>/tasks.
        #[arg(long, value_name = "DIR")]
        tasks: Option<PathBuf>,
        /// Fixture workspace directory. Default: <bench_root>/fixtures.
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
    },
    /// Re-check a run's workspace against its task's verification spec.
    Verify {
        /// Run id to verify.
        #[arg(value_name = "RUN_ID")]
        run_id: String,
        /// Task directory. Default: <bench_root>/tasks.
        #[arg(long, value_name = "DIR")]
        tasks: Option<PathBuf>,
    },
    /// Benchmark matrix operations.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Summarize result rows into per-model, per-setting scores.
    Score {
        /// Result rows file (JSONL).
        #[arg(long, value_name = "FILE")]
        rows: PathBuf,
        /// Roll-up mode: two_stage or pooled.
        #[arg(long, value_name = "MODE")]
        mean: Option<String>,
        /// Task completion rule: any_rep or all_reps.
        #[arg(long, value_name = "RULE")]
        completion: Option<String>,
        /// Repetition alignment: per_task or global.
        #[arg(long, value_name = "MODE")]
        alignment: Option<String>,
        /// Write summaries to this file instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Rank models within one setting on score, then cost.
    Rank {
        /// Result rows file (JSONL).
        #[arg(long, value_name = "FILE")]
        rows: PathBuf,
        /// Setting to rank: "with" or "no".
        #[arg(long, value_name = "with|no")]
        setting: String,
        /// Roll-up mode: two_stage or pooled.
        #[arg(long, value_name = "MODE")]
        mean: Option<String>,
        /// Task completion rule: any_rep or all_reps.
        #[arg(long, value_name = "RULE")]
        completion: Option<String>,
        /// Repetition alignment: per_task or global.
        #[arg(long, value_name = "MODE")]
        alignment: Option<String>,
        /// Write the leaderboard rows to this file instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compare with-skills and no-skills rows into a gain table.
    Report {
        /// Result rows for the with-skills setting (JSONL).
        #[arg(long = "with", value_name = "FILE")]
        with_rows: PathBuf,
        /// Result rows for the no-skills setting (JSONL).
        #[arg(long = "no", value_name = "FILE")]
        no_rows: PathBuf,
        /// Roll-up mode: two_stage or pooled.
        #[arg(long, value_name = "MODE")]
        mean: Option<String>,
        /// Task completion rule: any_rep or all_reps.
        #[arg(long, value_name = "RULE")]
        completion: Option<String>,
        /// Repetition alignment: per_task or global.
        #[arg(long, value_name = "MODE")]
        alignment: Option<String>,
        /// Write the table as JSON to this file as well.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Run the model x task x setting x repetition matrix.
    Run {
        /// Task directory. Default: <bench_root>/tasks.
        #[arg(long, value_name = "DIR")]
        tasks: Option<PathBuf>,
        /// Comma-separated model references.
        #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
        models: Vec<String>,
        /// Repetitions per cell.
        #[arg(long, value_name = "N", default_value_t = 1)]
        reps: u32,
        /// Settings to run: with, no, or both.
        #[arg(long, value_name = "with|no|both", default_value = "both")]
        settings: String,
        /// Fixture workspace directory. Default: <bench_root>/fixtures.
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
        /// Scripted agent directory holding
        /// <model>--<task>--<setting>.turns files. Default:
        /// <bench_root>/agents. When absent, the HTTP backend
        /// configured via CLAWHARNESS_API_BASE is used.
        #[arg(long, value_name = "DIR")]
        agents: Option<PathBuf>,
        /// Base URL of the completion API for live runs.
        #[arg(long, value_name = "URL")]
        api_base: Option<String>,
        /// Scripted judge table (JSONL). Default: <bench_root>/judge.scores.
        #[arg(long, value_name = "FILE")]
        judge_table: Option<PathBuf>,
        /// Result rows file, appended to on reruns. Default:
        /// <bench_root>/rows.jsonl.
        #[arg(long, value_name = "FILE")]
        results: Option<PathBuf>,
        /// Execute at most N new cells this invocation, then stop.
        #[arg(long, value_name = "N")]
        max_cells: Option<usize>,
    },
}
