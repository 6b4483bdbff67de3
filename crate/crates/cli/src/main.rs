//! `clawharness`: command line driver for the skill-graph harness.
//!
//! Exit codes: 0 on success, 1 on domain failure (failed validation,
//! verification, or run), 2 on usage errors.

use clap::Parser;

use clawharness::args::{BenchCommand, Cli, Command};
use clawharness::commands::bench::BenchRunArgs;
use clawharness::commands::runs::RunArgs;
use clawharness::commands::scoring::ScoreOpts;
use clawharness::commands::{self};
use clawharness::config::{self, CliError};

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version print to stdout and exit 0; true
            // parse errors go to stderr with the usage exit code.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            let prefix = match &err {
                CliError::Usage(_) => "usage error",
                CliError::Domain(_) => "error",
            };
            eprintln!("{prefix}: {}", err.message());
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = config::resolve(&cli.global)?;
    match cli.command {
        Command::Validate { registry_root } => {
            commands::registry::validate(&config, registry_root.as_deref())
        }
        Command::Plan { targets } => commands::registry::plan(&config, &targets),
        Command::Run {
            task,
            setting,
            turns,
            api_base,
            stop_after,
            repetition,
            tasks,
            fixtures,
        } => {
            let setting = commands::parse_setting(&setting)?;
            commands::runs::run(
                &config,
                RunArgs {
                    task: &task,
                    setting,
                    turns: turns.as_deref(),
                    api_base: api_base.as_deref(),
                    stop_after,
                    repetition,
                    tasks: tasks.as_deref(),
                    fixtures: fixtures.as_deref(),
                },
            )
        }
        Command::Resume { run_id, stop_after, tasks, fixtures } => commands::runs::resume(
            &config,
            &run_id,
            stop_after,
            tasks.as_deref(),
            fixtures.as_deref(),
        ),
        Command::Verify { run_id, tasks } => {
            commands::runs::verify(&config, &run_id, tasks.as_deref())
        }
        Command::Bench(BenchCommand::Run {
            tasks,
            models,
            reps,
            settings,
            fixtures,
            agents,
            api_base,
            judge_table,
            results,
            max_cells,
        }) => commands::bench::run(
            &config,
            BenchRunArgs {
                tasks: tasks.as_deref(),
                models: &models,
                reps,
                settings: &settings,
                fixtures: fixtures.as_deref(),
                agents: agents.as_deref(),
                api_base: api_base.as_deref(),
                judge_table: judge_table.as_deref(),
                results: results.as_deref(),
                max_cells,
            },
        ),
        Command::Score { rows, mean, completion, alignment, out } => commands::scoring::score(
            &config,
            &rows,
            &ScoreOpts {
                mean: mean.as_deref(),
                completion: completion.as_deref(),
                alignment: alignment.as_deref(),
            },
            out.as_deref(),
        ),
        Command::Rank { rows, setting, mean, completion, alignment, out } => {
            commands::scoring::rank(
                &config,
                &rows,
                &setting,
                &ScoreOpts {
                    mean: mean.as_deref(),
                    completion: completion.as_deref(),
                    alignment: alignment.as_deref(),
                },
                out.as_deref(),
            )
        }
        Command::Report { with_rows, no_rows, mean, completion, alignment, out } => {
            commands::scoring::report(
                &config,
                &with_rows,
                &no_rows,
                &ScoreOpts {
                    mean: mean.as_deref(),
                    completion: completion.as_deref(),
                    alignment: alignment.as_deref(),
                },
                out.as_deref(),
            )
        }
        Command::Version => {
            println!("clawharness {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}
