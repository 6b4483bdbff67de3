//! End-to-end tests of the installed binary: exit codes, output
//! streams, and the single-run lifecycle against the shipped fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn fixtures() -> PathBuf {
    repo_root().join("fixtures")
}

/// A binary invocation isolated from ambient CLAWHARNESS_* settings,
/// rooted in the repository so the default fixture paths resolve.
fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_clawharness"));
    cmd.current_dir(repo_root());
    for (key, _) in std::env::vars() {
        if key.starts_with("CLAWHARNESS_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn version_prints_and_succeeds() {
    let out = run_ok(bin().arg("version"));
    assert!(stdout_of(&out).starts_with("clawharness "));
    let out = run_ok(bin().arg("--version"));
    assert!(stdout_of(&out).contains("clawharness"));
}

#[test]
fn help_goes_to_stdout_for_every_subcommand() {
    for sub in ["validate", "plan", "run", "resume", "verify", "score", "rank", "report"] {
        let out = run_ok(bin().args([sub, "--help"]));
        assert!(stdout_of(&out).contains("Usage:"), "no usage text for {sub}");
    }
    let out = run_ok(bin().args(["bench", "run", "--help"]));
    assert!(stdout_of(&out).contains("--models"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(exit_code(bin().arg("frobnicate")), 2);
    assert_eq!(exit_code(bin().args(["validate", "--frob"])), 2);
    assert_eq!(
        exit_code(bin().args(["run", "--task", "T001", "--setting", "sideways"])),
        2
    );
    // A backend is required before any run can start.
    assert_eq!(
        exit_code(bin().args(["run", "--task", "T001", "--setting", "with"])),
        2
    );
}

#[test]
fn validate_accepts_the_shipped_registry() {
    let out = run_ok(bin().arg("validate"));
    assert!(stdout_of(&out).contains("registry ok: 9 skill(s)"));
}

#[test]
fn validate_rejects_a_cyclic_registry_with_findings_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a-skill.skill"),
        r#"{"id":"a-skill","layer":"subagent","kind":"tool","title":"A","description":"d","dependencies":["b-skill"]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("b-skill.skill"),
        r#"{"id":"b-skill","layer":"subagent","kind":"tool","title":"B","description":"d","dependencies":["a-skill"]}"#,
    )
    .unwrap();
    let out = bin().arg("validate").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("cycle"));
}

#[test]
fn plan_prints_dependencies_before_dependents() {
    let out = run_ok(bin().args(["plan", "hcp-dataset"]));
    let lines: Vec<_> = stdout_of(&out).lines().map(str::to_string).collect();
    assert_eq!(
        lines,
        [
            "bids-validate",
            "dicom-to-nifti",
            "fsl-tool",
            "metadata-extract",
            "fmri-modality",
            "roi-table-export",
            "phenotype-model",
            "hcp-dataset"
        ]
    );
    assert_eq!(exit_code(bin().args(["plan", "no-such-skill"])), 1);
}

#[test]
fn run_verify_and_finished_resume_behave() {
    let runs = tempfile::tempdir().unwrap();
    let turns = fixtures().join("bench/agents/model-alpha--T001--with_skills.turns");
    let out = run_ok(
        bin()
            .arg("--runs-root")
            .arg(runs.path())
            .args(["run", "--task", "T001", "--setting", "with", "--turns"])
            .arg(&turns),
    );
    let text = stdout_of(&out);
    assert!(text.contains("completed"), "run did not complete: {text}");
    let run_id = text
        .split_whitespace()
        .nth(1)
        .expect("run id in the report header")
        .to_string();
    assert!(runs.path().join(&run_id).join("audit.jsonl").exists());

    let out = run_ok(bin().arg("--runs-root").arg(runs.path()).args(["verify", &run_id]));
    assert!(stdout_of(&out).contains("verification passed"));

    // A finished run cannot be resumed.
    assert_eq!(
        exit_code(bin().arg("--runs-root").arg(runs.path()).args(["resume", &run_id])),
        1
    );
}

#[test]
fn interrupted_runs_resume_to_completion() {
    let runs = tempfile::tempdir().unwrap();
    let turns = fixtures().join("bench/agents/model-beta--T003--with_skills.turns");
    let out = run_ok(
        bin()
            .arg("--runs-root")
            .arg(runs.path())
            .args(["run", "--task", "T003", "--setting", "with", "--stop-after", "1", "--turns"])
            .arg(&turns),
    );
    let text = stdout_of(&out);
    assert!(text.contains("interrupted after 1 completed stage(s)"));
    let run_id = text.split_whitespace().nth(1).unwrap().to_string();

    let out = run_ok(bin().arg("--runs-root").arg(runs.path()).args(["resume", &run_id]));
    assert!(stdout_of(&out).contains("completed"));
}

#[test]
fn failed_runs_exit_one() {
    let runs = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let turns = dir.path().join("quit.turns");
    std::fs::write(&turns, "{\"tool_calls\":[{\"name\":\"finish\",\"arguments\":{}}]}\n")
        .unwrap();
    let out = bin()
        .arg("--runs-root")
        .arg(runs.path())
        .args(["run", "--task", "T001", "--setting", "with", "--turns"])
        .arg(&turns)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("failed"));
}

#[test]
fn report_reproduces_the_reference_table() {
    let out = run_ok(
        bin()
            .args(["report", "--with"])
            .arg(fixtures().join("table1_with.rows"))
            .arg("--no")
            .arg(fixtures().join("table1_no.rows")),
    );
    let text = stdout_of(&out);
    assert!(text.contains("Base Model"));
    assert!(text.contains("Claude-Opus-4.6"));
    let opus = text.lines().find(|l| l.starts_with("Claude-Opus-4.6")).unwrap();
    assert!(opus.contains("72.10") && opus.contains("69.12"));
    assert!(opus.contains("2.98") && opus.contains("0.0965"));
    let mean = text.lines().find(|l| l.starts_with("Mean")).unwrap();
    assert!(mean.contains("4.74"));
}

#[test]
fn score_errors_on_a_missing_rows_file() {
    assert_eq!(exit_code(bin().args(["score", "--rows", "/nonexistent.rows"])), 1);
}

#[test]
fn bench_run_fills_the_matrix_and_is_idempotent() {
    let runs = tempfile::tempdir().unwrap();
    let results = runs.path().join("rows.jsonl");
    let mut first = bin();
    first
        .arg("--runs-root")
        .arg(runs.path().join("runs"))
        .args(["bench", "run", "--models", "model-beta", "--reps", "1", "--results"])
        .arg(&results);
    let out = run_ok(&mut first);
    assert!(stdout_of(&out).contains("executed 16 cell(s)"));
    let lines = std::fs::read_to_string(&results).unwrap().lines().count();
    assert_eq!(lines, 16);

    let mut again = bin();
    again
        .arg("--runs-root")
        .arg(runs.path().join("runs"))
        .args(["bench", "run", "--models", "model-beta", "--reps", "1", "--results"])
        .arg(&results);
    let out = run_ok(&mut again);
    assert!(stdout_of(&out).contains("executed 0 cell(s), skipped 16 existing"));
}

#[test]
fn flag_beats_environment_beats_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("clawharness.toml");
    std::fs::write(&cfg, "registry_root = \"/nonexistent-from-file\"\n").unwrap();

    // Environment points at the real registry and wins over the file.
    let mut via_env = bin();
    via_env.current_dir(dir.path());
    via_env.env("CLAWHARNESS_REGISTRY_ROOT", fixtures().join("registry"));
    let out = run_ok(via_env.arg("validate"));
    assert!(stdout_of(&out).contains("registry ok"));

    // A flag wins over an environment value pointing elsewhere.
    let mut via_flag = bin();
    via_flag.current_dir(dir.path());
    via_flag.env("CLAWHARNESS_REGISTRY_ROOT", "/nonexistent-from-env");
    via_flag.arg("--registry").arg(fixtures().join("registry"));
    let out = run_ok(via_flag.arg("validate"));
    assert!(stdout_of(&out).contains("registry ok"));

    // With neither, the config file's bad path surfaces.
    let mut via_file = bin();
    via_file.current_dir(dir.path());
    assert_eq!(via_file.arg("validate").output().unwrap().status.code(), Some(1));
}
