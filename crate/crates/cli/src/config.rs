//! Global configuration and its precedence chain: command line flag,
//! then CLAWHARNESS_* environment variable, then config file, then
//! built-in default.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clawharness_core::harness::DriftPolicy;
use serde::Deserialize;

use crate::args::GlobalArgs;

pub const DEFAULT_CONFIG_PATH: &str = "clawharness.toml";
pub const ENV_PREFIX: &str = "CLAWHARNESS_";

/// Exit-code classes: usage errors exit 2, domain failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

/// Shorthand for mapping library errors onto the domain exit class.
pub fn domain(err: impl Display) -> CliError {
    CliError::Domain(err.to_string())
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone)]
pub struct GlobalConfig {
    pub registry_root: PathBuf,
    pub runs_root: PathBuf,
    pub bench_root: PathBuf,
    pub model_ref: String,
    pub workers: usize,
    pub drift: DriftPolicy,
    pub verbosity: u8,
}

/// Optional keys of the TOML config file; unknown keys are rejected so
/// typos surface instead of silently falling back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    registry_root: Option<PathBuf>,
    runs_root: Option<PathBuf>,
    bench_root: Option<PathBuf>,
    model_ref: Option<String>,
    workers: Option<usize>,
    drift: Option<String>,
    verbosity: Option<u8>,
}

fn load_file(explicit: Option<&Path>) -> Result<FileConfig, CliError> {
    let path = match explicit {
        Some(p) => {
            if !p.exists() {
                return Err(usage(format!("config file {} does not exist", p.display())));
            }
            p.to_path_buf()
        }
        None => {
            let default = PathBuf::from(DEFAULT_CONFIG_PATH);
            if !default.exists() {
                return Ok(FileConfig::default());
            }
            default
        }
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| usage(format!("bad config file {}: {e}", path.display())))
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(format!("{ENV_PREFIX}{name}")).ok().filter(|v| !v.is_empty())
}

fn parse_env<T: FromStr>(name: &str) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    match env_var(name) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|e| usage(format!("bad {ENV_PREFIX}{name} value {raw:?}: {e}"))),
    }
}

pub fn parse_drift(raw: &str) -> Result<DriftPolicy, CliError> {
    match raw {
        "warn" => Ok(DriftPolicy::Warn),
        "strict" => Ok(DriftPolicy::Strict),
        other => Err(usage(format!("unknown drift policy {other:?}, expected warn or strict"))),
    }
}

/// Resolves the full global configuration for this invocation.
pub fn resolve(args: &GlobalArgs) -> Result<GlobalConfig, CliError> {
    let file = load_file(args.config.as_deref())?;

    let registry_root = args
        .registry
        .clone()
        .or(env_var("REGISTRY_ROOT").map(PathBuf::from))
        .or(file.registry_root)
        .unwrap_or_else(|| PathBuf::from("fixtures/registry"));
    let runs_root = args
        .runs_root
        .clone()
        .or(env_var("RUNS_ROOT").map(PathBuf::from))
        .or(file.runs_root)
        .unwrap_or_else(|| PathBuf::from("runs"));
    let bench_root = args
        .bench_root
        .clone()
        .or(env_var("BENCH_ROOT").map(PathBuf::from))
        .or(file.bench_root)
        .unwrap_or_else(|| PathBuf::from("fixtures/bench"));
    let model_ref = args
        .model
        .clone()
        .or(env_var("MODEL"))
        .or(file.model_ref)
        .unwrap_or_else(|| "scripted-model".to_string());
    let workers = args
        .workers
        .or(parse_env::<usize>("WORKERS")?)
        .or(file.workers)
        .unwrap_or(1);
    if workers < 1 {
        return Err(usage("workers must be at least 1"));
    }
    let drift_raw = args
        .drift
        .clone()
        .or(env_var("DRIFT"))
        .or(file.drift)
        .unwrap_or_else(|| "warn".to_string());
    let drift = parse_drift(&drift_raw)?;
    let verbosity = args
        .verbosity
        .or(parse_env::<u8>("VERBOSITY")?)
        .or(file.verbosity)
        .unwrap_or(1);

    Ok(GlobalConfig {
        registry_root,
        runs_root,
        bench_root,
        model_ref,
        workers,
        drift,
        verbosity,
    })
}

/// API endpoint settings for live backends, resolved from flags and
/// environment only (never from the config file, which is shareable).
pub fn api_base(flag: Option<&str>) -> Option<String> {
    flag.map(str::to_string).or_else(|| env_var("API_BASE"))
}

pub fn api_key() -> Option<String> {
    env_var("API_KEY")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::GlobalArgs;

    fn bare_args() -> GlobalArgs {
        GlobalArgs {
            config: None,
            registry: None,
            runs_root: None,
            bench_root: None,
            model: None,
            workers: None,
            drift: None,
            verbosity: None,
        }
    }

    #[test]
    fn defaults_fill_every_field() {
        let cfg = resolve(&bare_args()).unwrap();
        assert_eq!(cfg.registry_root, PathBuf::from("fixtures/registry"));
        assert_eq!(cfg.runs_root, PathBuf::from("runs"));
        assert_eq!(cfg.bench_root, PathBuf::from("fixtures/bench"));
        assert_eq!(cfg.model_ref, "scripted-model");
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.drift, DriftPolicy::Warn);
        assert_eq!(cfg.verbosity, 1);
    }

    #[test]
    fn flags_beat_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "runs_root = \"from-file\"\nworkers = 3\n").unwrap();
        let mut args = bare_args();
        args.config = Some(path);
        args.runs_root = Some(PathBuf::from("from-flag"));
        let cfg = resolve(&args).unwrap();
        assert_eq!(cfg.runs_root, PathBuf::from("from-flag"));
        assert_eq!(cfg.workers, 3);
    }

    #[test]
    fn unknown_config_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "runz_root = \"x\"\n").unwrap();
        let mut args = bare_args();
        args.config = Some(path);
        let err = resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_explicit_config_is_a_usage_error() {
        let mut args = bare_args();
        args.config = Some(PathBuf::from("/nonexistent/cfg.toml"));
        let err = resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.message().contains("does not exist"));
    }

    #[test]
    fn bad_drift_value_is_rejected() {
        let mut args = bare_args();
        args.drift = Some("loose".into());
        let err = resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn zero_workers_are_rejected() {
        let mut args = bare_args();
        args.workers = Some(0);
        assert_eq!(resolve(&args).unwrap_err().exit_code(), 2);
    }
}
