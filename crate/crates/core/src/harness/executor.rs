//! The run driver: decompose, initialize, execute, verify.

use std::path::{Path, PathBuf};

use crate::agent::{AgentBackend, AgentSession, Message, ToolCall};
use crate::bench::TaskSpec;
use crate::digest::{digest_tree, sha256_file};
use crate::pathglob::glob_files;
use crate::record::{read_json, write_json_atomic};
use crate::skill::{execution_closure, topological_plan, SkillGraph, SkillId, StepMode};
use crate::timeutil::Timestamp;
use crate::verify::{verify_workspace, VerificationReport};

use super::audit::{read_audit, AuditLog, AuditPayload, DriftChange, Outcome};
use super::checkpoint::{checkpoint_file_name, latest_checkpoint, Checkpoint};
use super::envmanifest::{capture_env, env_drift, EnvManifest};
use super::plan::{stage_from_command, stage_from_skill, PlanStage};
use super::report::RunReport;
use super::run::{new_run_id, Phase, RunRecord, Setting};
use super::{copy_tree, DriftPolicy, HarnessConfig, HarnessError, RunPaths};

/// Everything needed to start one run.
pub struct RunRequest<'a> {
    pub graph: &'a SkillGraph,
    pub task: &'a TaskSpec,
    /// Directory holding fixture workspaces, one per task.
    pub fixtures_root: &'a Path,
    pub backend: &'a dyn AgentBackend,
    pub model_ref: &'a str,
    pub setting: Setting,
    pub repetition: u32,
    /// Stop cleanly once this many stages have completed in total. The
    /// run stays resumable; used to exercise interrupt recovery.
    pub stop_after_stages: Option<usize>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub report: RunReport,
    pub run_dir: PathBuf,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.record.phase == Phase::Completed
    }
}

#[derive(Debug)]
pub enum RunCompletion {
    Finished(Box<RunOutcome>),
    Interrupted { run_id: String, run_dir: PathBuf, completed_stages: usize },
}

impl RunCompletion {
    pub fn run_id(&self) -> &str {
        match self {
            RunCompletion::Finished(outcome) => &outcome.record.run_id,
            RunCompletion::Interrupted { run_id, .. } => run_id,
        }
    }

    pub fn finished(self) -> Option<Box<RunOutcome>> {
        match self {
            RunCompletion::Finished(outcome) => Some(outcome),
            RunCompletion::Interrupted { .. } => None,
        }
    }
}

struct RunCtx<'a> {
    config: &'a HarnessConfig,
    task: &'a TaskSpec,
    paths: RunPaths,
    record: RunRecord,
    audit: AuditLog,
}

impl RunCtx<'_> {
    fn emit(&mut self, payload: AuditPayload) -> Result<(), HarnessError> {
        self.audit.append(payload)?;
        Ok(())
    }

    fn persist_record(&self) -> Result<(), HarnessError> {
        write_json_atomic(&self.paths.run_record(), &self.record)?;
        Ok(())
    }

    /// Writes a checkpoint whose `seq_at_save` is the sequence number of
    /// its own `checkpoint_saved` event, then emits that event.
    fn save_checkpoint(&mut self, next_phase: Phase) -> Result<(), HarnessError> {
        let seq_at_save = self.audit.next_seq();
        let artifact_digests = digest_tree(&self.paths.workspace())?;
        let env_manifest_digest = sha256_file(&self.paths.manifest()).unwrap_or_default();
        let checkpoint = Checkpoint {
            run_id: self.record.run_id.clone(),
            seq_at_save,
            phase: next_phase,
            completed_stages: self.record.completed_stages.clone(),
            artifact_digests,
            env_manifest_digest,
            saved_at: Timestamp::now(),
        };
        let name = checkpoint_file_name(seq_at_save);
        write_json_atomic(&self.paths.checkpoints().join(&name), &checkpoint)?;
        self.emit(AuditPayload::CheckpointSaved {
            seq_at_save,
            path: format!("checkpoints/{name}"),
        })?;
        Ok(())
    }

    /// Terminal failure path: records the error, closes the current
    /// phase, and finalizes the run as failed.
    fn fail(
        mut self,
        phase: Phase,
        message: String,
    ) -> Result<RunCompletion, HarnessError> {
        self.emit(AuditPayload::Error { message })?;
        self.emit(AuditPayload::PhaseEnd { phase, outcome: Outcome::Failed })?;
        finalize(self, None, false)
    }
}

/// Runs one task from scratch. Domain failures (bad plan, failed stage,
/// failed verification) finish as a failed run; only infrastructure
/// problems surface as errors.
pub fn run_task(
    config: &HarnessConfig,
    request: RunRequest<'_>,
) -> Result<RunCompletion, HarnessError> {
    let started_at = Timestamp::now();
    let run_id = new_run_id(started_at);
    let run_dir = config.runs_root.join(&run_id);
    if run_dir.exists() {
        return Err(HarnessError::RunExists(run_dir));
    }
    let paths = RunPaths::new(&run_dir);
    for dir in [&run_dir, &paths.checkpoints(), &paths.workspace(), &paths.logs()] {
        std::fs::create_dir_all(dir)
            .map_err(|e| HarnessError::Io { path: dir.clone(), source: e })?;
    }
    let record = RunRecord {
        run_id: run_id.clone(),
        task_id: request.task.id.clone(),
        setting: request.setting,
        model_ref: request.model_ref.to_string(),
        repetition: request.repetition,
        phase: Phase::Decompose,
        plan: Vec::new(),
        completed_stages: Vec::new(),
        workspace: "workspace".to_string(),
        started_at,
        ended_at: None,
        metrics: Default::default(),
    };
    let audit = AuditLog::create(&paths.audit(), &run_id)?;
    let mut ctx = RunCtx { config, task: request.task, paths, record, audit };
    ctx.persist_record()?;

    ctx.emit(AuditPayload::PhaseBegin { phase: Phase::Decompose })?;
    let plan = match decompose(&mut ctx, &request)? {
        Ok(plan) => plan,
        Err(message) => return ctx.fail(Phase::Decompose, message),
    };
    ctx.record.plan = plan;
    ctx.emit(AuditPayload::PhaseEnd { phase: Phase::Decompose, outcome: Outcome::Ok })?;
    ctx.record.phase = Phase::Initialize;
    ctx.persist_record()?;
    ctx.save_checkpoint(Phase::Initialize)?;

    ctx.emit(AuditPayload::PhaseBegin { phase: Phase::Initialize })?;
    if let Err(message) = initialize(&mut ctx, request.fixtures_root)? {
        return ctx.fail(Phase::Initialize, message);
    }
    ctx.emit(AuditPayload::PhaseEnd { phase: Phase::Initialize, outcome: Outcome::Ok })?;
    ctx.record.phase = Phase::Execute;
    ctx.persist_record()?;
    ctx.save_checkpoint(Phase::Execute)?;

    run_stages_then_verify(ctx, request.stop_after_stages)
}

/// Continues an interrupted run from its newest checkpoint. The plan is
/// read back from the run record, so no agent backend is involved.
pub fn resume_run(
    config: &HarnessConfig,
    task: &TaskSpec,
    fixtures_root: &Path,
    run_id: &str,
    stop_after_stages: Option<usize>,
) -> Result<RunCompletion, HarnessError> {
    let run_dir = config.runs_root.join(run_id);
    let paths = RunPaths::new(&run_dir);
    let corrupt = |detail: String| HarnessError::Corrupt {
        run_id: run_id.to_string(),
        detail,
    };
    let mut record: RunRecord = read_json(&paths.run_record())?;
    if record.run_id != run_id {
        return Err(corrupt(format!("run record names {}", record.run_id)));
    }
    if record.task_id != task.id {
        return Err(HarnessError::TaskMismatch {
            run_task: record.task_id,
            given_task: task.id.clone(),
        });
    }
    if record.phase.is_terminal() {
        return Err(HarnessError::RunFinished {
            run_id: run_id.to_string(),
            phase: record.phase.as_str().to_string(),
        });
    }
    let Some((_, checkpoint)) = latest_checkpoint(&paths.checkpoints())? else {
        return Err(HarnessError::NoCheckpoint { run_id: run_id.to_string() });
    };
    if checkpoint.run_id != run_id {
        return Err(corrupt(format!("checkpoint names {}", checkpoint.run_id)));
    }
    if checkpoint.phase.is_terminal() {
        return Err(HarnessError::RunFinished {
            run_id: run_id.to_string(),
            phase: checkpoint.phase.as_str().to_string(),
        });
    }
    let (audit, last_seq) = AuditLog::resume(&paths.audit(), run_id, checkpoint.seq_at_save)?;
    let mut ctx = RunCtx { config, task, paths, record: record.clone(), audit };
    if last_seq != checkpoint.seq_at_save {
        if last_seq + 1 == checkpoint.seq_at_save {
            // The checkpoint file landed but the crash ate its event.
            ctx.emit(AuditPayload::CheckpointSaved {
                seq_at_save: checkpoint.seq_at_save,
                path: format!("checkpoints/{}", checkpoint_file_name(checkpoint.seq_at_save)),
            })?;
        } else {
            return Err(corrupt(format!(
                "audit ends at seq {last_seq}, checkpoint expects {}",
                checkpoint.seq_at_save
            )));
        }
    }
    // The checkpoint, not the run record, is the resume authority.
    record.completed_stages = checkpoint.completed_stages.clone();
    record.phase = checkpoint.phase;
    record.metrics.skill_calls = record
        .completed_stages
        .iter()
        .filter(|sid| {
            record.plan.iter().any(|st| &&st.stage_id == sid && st.skill_id.is_some())
        })
        .count() as u64;
    ctx.record = record;
    ctx.persist_record()?;

    match checkpoint.phase {
        Phase::Initialize => {
            ctx.emit(AuditPayload::PhaseBegin { phase: Phase::Initialize })?;
            if let Err(message) = initialize(&mut ctx, fixtures_root)? {
                return ctx.fail(Phase::Initialize, message);
            }
            ctx.emit(AuditPayload::PhaseEnd {
                phase: Phase::Initialize,
                outcome: Outcome::Ok,
            })?;
            ctx.record.phase = Phase::Execute;
            ctx.persist_record()?;
            ctx.save_checkpoint(Phase::Execute)?;
            run_stages_then_verify(ctx, stop_after_stages)
        }
        Phase::Execute | Phase::Verify => {
            let drifted = check_drift(&mut ctx, &checkpoint)?;
            if drifted && config.drift == DriftPolicy::Strict {
                let phase = checkpoint.phase;
                return ctx.fail(
                    phase,
                    "workspace drifted from checkpoint under strict policy".to_string(),
                );
            }
            if checkpoint.phase == Phase::Verify {
                verify_then_finalize(ctx)
            } else {
                run_stages_then_verify(ctx, stop_after_stages)
            }
        }
        Phase::Decompose | Phase::Completed | Phase::Failed => {
            Err(corrupt(format!("checkpoint in phase {}", checkpoint.phase.as_str())))
        }
    }
}

fn run_stages_then_verify(
    mut ctx: RunCtx<'_>,
    stop_after_stages: Option<usize>,
) -> Result<RunCompletion, HarnessError> {
    let interrupted = |ctx: &RunCtx<'_>| RunCompletion::Interrupted {
        run_id: ctx.record.run_id.clone(),
        run_dir: ctx.paths.run_dir.clone(),
        completed_stages: ctx.record.completed_stages.len(),
    };
    if let Some(stop) = stop_after_stages {
        if ctx.record.completed_stages.len() >= stop {
            return Ok(interrupted(&ctx));
        }
    }
    if ctx.record.completed_stages.is_empty() {
        ctx.emit(AuditPayload::PhaseBegin { phase: Phase::Execute })?;
    }
    let plan = ctx.record.plan.clone();
    for stage in plan.iter().skip(ctx.record.completed_stages.len()) {
        if let Err(message) = execute_stage(&mut ctx, stage)? {
            return ctx.fail(Phase::Execute, message);
        }
        ctx.record.completed_stages.push(stage.stage_id.clone());
        if stage.skill_id.is_some() {
            ctx.record.metrics.skill_calls += 1;
        }
        ctx.persist_record()?;
        ctx.save_checkpoint(Phase::Execute)?;
        if let Some(stop) = stop_after_stages {
            if ctx.record.completed_stages.len() >= stop {
                return Ok(interrupted(&ctx));
            }
        }
    }
    ctx.emit(AuditPayload::PhaseEnd { phase: Phase::Execute, outcome: Outcome::Ok })?;
    ctx.record.phase = Phase::Verify;
    ctx.persist_record()?;
    ctx.save_checkpoint(Phase::Verify)?;
    verify_then_finalize(ctx)
}

fn verify_then_finalize(mut ctx: RunCtx<'_>) -> Result<RunCompletion, HarnessError> {
    ctx.emit(AuditPayload::PhaseBegin { phase: Phase::Verify })?;
    let mut spec = ctx.task.verification();
    let planned_outputs: Vec<_> =
        ctx.record.plan.iter().flat_map(|stage| stage.outputs.iter().cloned()).collect();
    spec.merge_expected(&planned_outputs);
    let verification = match verify_workspace(&spec, &ctx.paths.workspace()) {
        Ok(report) => report,
        Err(e) => return ctx.fail(Phase::Verify, format!("verification could not run: {e}")),
    };
    for check in &verification.checks {
        ctx.emit(AuditPayload::CheckResult {
            check_kind: check.kind,
            target: check.target.clone(),
            status: check.status,
            detail: check.detail.clone(),
        })?;
    }
    let passed = verification.passed();
    ctx.emit(AuditPayload::PhaseEnd {
        phase: Phase::Verify,
        outcome: if passed { Outcome::Ok } else { Outcome::Failed },
    })?;
    finalize(ctx, Some(verification), passed)
}

fn finalize(
    mut ctx: RunCtx<'_>,
    verification: Option<VerificationReport>,
    passed: bool,
) -> Result<RunCompletion, HarnessError> {
    ctx.record.phase = if passed { Phase::Completed } else { Phase::Failed };
    let ended = Timestamp::now();
    ctx.record.metrics.elapsed_seconds = ended.seconds_since(&ctx.record.started_at);
    ctx.record.ended_at = Some(ended);
    ctx.persist_record()?;
    let final_phase = ctx.record.phase;
    ctx.save_checkpoint(final_phase)?;
    let events = read_audit(&ctx.paths.audit())?;
    let report = RunReport::from_audit(&ctx.record, &events, verification);
    write_json_atomic(&ctx.paths.report(), &report)?;
    Ok(RunCompletion::Finished(Box::new(RunOutcome {
        record: ctx.record,
        report,
        run_dir: ctx.paths.run_dir,
    })))
}

// --- decompose ---------------------------------------------------------

/// Drives the planning conversation. `Ok(Err(message))` is a planning
/// failure that fails the run; the outer error is infrastructure.
fn decompose(
    ctx: &mut RunCtx<'_>,
    request: &RunRequest<'_>,
) -> Result<Result<Vec<PlanStage>, String>, HarnessError> {
    let mut session = AgentSession::new(request.model_ref, ctx.config.call_budget);
    let mut pending = vec![
        Message::system(planning_prompt(request.setting)),
        Message::user(task_brief(ctx.task, request)?),
    ];
    let mut command_stages: Vec<PlanStage> = Vec::new();
    loop {
        let turn = match session.complete(request.backend, std::mem::take(&mut pending)) {
            Ok(turn) => turn,
            Err(e) => return Ok(Err(format!("planning failed: {e}"))),
        };
        ctx.emit(AuditPayload::AgentCall {
            call_index: session.calls_made(),
            prompt_tokens: turn.usage.prompt_tokens,
            completion_tokens: turn.usage.completion_tokens,
        })?;
        ctx.record.metrics.tokens = session.usage().total();
        if turn.tool_calls.is_empty() {
            pending.push(Message::user(
                "Respond with a tool call. Available tools: list_skills, read_skill, \
                 propose_plan, run_command, finish.",
            ));
            continue;
        }
        for call in turn.tool_calls {
            match (request.setting, call) {
                (Setting::WithSkills, ToolCall::ListSkills) => {
                    pending.push(Message::tool(render_skill_list(request.graph)));
                }
                (Setting::WithSkills, ToolCall::ReadSkill { id }) => {
                    pending.push(Message::tool(render_skill(request.graph, &id)));
                }
                (Setting::WithSkills, ToolCall::ProposePlan { targets }) => {
                    return Ok(build_skill_plan(request.graph, &targets));
                }
                (Setting::WithSkills, ToolCall::Finish) => {
                    return Ok(Err("agent finished without proposing a plan".to_string()));
                }
                (Setting::WithSkills, ToolCall::RunCommand { .. }) => {
                    return Ok(Err(
                        "run_command is not available when planning over skills".to_string()
                    ));
                }
                (Setting::NoSkills, ToolCall::RunCommand { argv, mode, writes }) => {
                    if let Some(bad) = writes.iter().find(|w| !valid_rel_path(&w.path)) {
                        return Ok(Err(format!(
                            "command write path {:?} escapes the workspace",
                            bad.path
                        )));
                    }
                    command_stages.push(stage_from_command(
                        command_stages.len() + 1,
                        argv,
                        mode,
                        writes,
                    ));
                    pending.push(Message::tool(format!(
                        "queued as stage {}",
                        command_stages.last().expect("just pushed").stage_id
                    )));
                }
                (Setting::NoSkills, ToolCall::Finish) => {
                    return Ok(Ok(command_stages));
                }
                (Setting::NoSkills, other) => {
                    return Ok(Err(format!(
                        "{} is not available without the skill registry",
                        other.name()
                    )));
                }
            }
        }
    }
}

fn build_skill_plan(
    graph: &SkillGraph,
    targets: &[String],
) -> Result<Vec<PlanStage>, String> {
    let mut ids = Vec::with_capacity(targets.len());
    for target in targets {
        let id = SkillId::new(target.clone())
            .map_err(|_| format!("plan names unknown skill {target:?}"))?;
        if !graph.contains(&id) {
            return Err(format!("plan names unknown skill {target:?}"));
        }
        ids.push(id);
    }
    let closure = execution_closure(graph, &ids).map_err(|e| e.to_string())?;
    let order = topological_plan(&closure).map_err(|e| e.to_string())?;
    Ok(order
        .iter()
        .map(|id| stage_from_skill(closure.get(id).expect("planned node")))
        .collect())
}

fn planning_prompt(setting: Setting) -> String {
    match setting {
        Setting::WithSkills => "You decompose a task into an execution plan over a skill \
            registry. Inspect skills with list_skills and read_skill, then call propose_plan \
            with the target skill ids; their dependencies are included automatically."
            .to_string(),
        Setting::NoSkills => "You decompose a task into shell commands. Queue each command \
            with run_command (stub mode commands declare the files they write), then call \
            finish when the plan is complete."
            .to_string(),
    }
}

fn task_brief(task: &TaskSpec, request: &RunRequest<'_>) -> Result<String, HarnessError> {
    let mut brief = format!("Task {}: {}\n\n{}\n", task.id, task.title, task.objectives);
    if !task.input_assumptions.is_empty() {
        brief.push_str(&format!("\nInput assumptions: {}\n", task.input_assumptions));
    }
    if !task.expected_artifacts.is_empty() {
        brief.push_str("\nExpected artifacts:\n");
        for slot in &task.expected_artifacts {
            brief.push_str(&format!(
                "- {} ({}){}\n",
                slot.name,
                slot.pattern,
                if slot.required { "" } else { " [optional]" }
            ));
        }
    }
    if !task.naming_conventions.is_empty() {
        brief.push_str("\nNaming conventions:\n");
        for pattern in &task.naming_conventions {
            brief.push_str(&format!("- {pattern}\n"));
        }
    }
    if !task.checkpoints.is_empty() {
        brief.push_str("\nCheckpoints:\n");
        for cp in &task.checkpoints {
            brief.push_str(&format!("- {}\n", cp.description));
        }
    }
    let fixture = request.fixtures_root.join(&task.fixture_workspace);
    let listing = digest_tree(&fixture)?;
    if !listing.is_empty() {
        brief.push_str("\nWorkspace files:\n");
        for path in listing.keys() {
            brief.push_str(&format!("- {path}\n"));
        }
    }
    Ok(brief)
}

fn render_skill_list(graph: &SkillGraph) -> String {
    let mut out = String::from("Available skills:\n");
    for manifest in graph.manifests() {
        let kind = manifest
            .kind
            .map(|k| format!("/{}", serde_variant_name(&k)))
            .unwrap_or_default();
        out.push_str(&format!(
            "- {} ({}{kind}): {}\n",
            manifest.id,
            serde_variant_name(&manifest.layer),
            manifest.title
        ));
    }
    out
}

/// Serialized (snake_case) name of a unit enum variant.
fn serde_variant_name<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn render_skill(graph: &SkillGraph, id: &str) -> String {
    let parsed = SkillId::new(id.to_string()).ok();
    match parsed.as_ref().and_then(|id| graph.get(id)) {
        Some(manifest) => {
            serde_json::to_string_pretty(manifest).unwrap_or_else(|e| e.to_string())
        }
        None => format!("no skill with id {id:?}"),
    }
}

// --- initialize --------------------------------------------------------

/// Copies the fixture workspace and writes the environment manifest.
fn initialize(
    ctx: &mut RunCtx<'_>,
    fixtures_root: &Path,
) -> Result<Result<(), String>, HarnessError> {
    let fixture = fixtures_root.join(&ctx.task.fixture_workspace);
    if !fixture.is_dir() {
        return Ok(Err(format!(
            "fixture workspace {} not found under {}",
            ctx.task.fixture_workspace,
            fixtures_root.display()
        )));
    }
    if let Err(e) = copy_tree(&fixture, &ctx.paths.workspace()) {
        return Ok(Err(format!("workspace initialization failed: {e}")));
    }
    let (manifest, failures) = capture_env(&ctx.config.env);
    write_json_atomic(&ctx.paths.manifest(), &manifest)?;
    for (tool, argv) in &manifest.capture.tool_probes.clone() {
        match manifest.tool_versions.get(tool) {
            Some(version) => ctx.emit(AuditPayload::CheckResult {
                check_kind: crate::verify::CheckKind::ToolProbe,
                target: tool.clone(),
                status: crate::verify::CheckStatus::Pass,
                detail: version.clone(),
            })?,
            None => {
                let detail = failures
                    .iter()
                    .find(|f| &f.tool == tool)
                    .map(|f| f.detail.clone())
                    .unwrap_or_else(|| format!("probe {argv:?} failed"));
                ctx.emit(AuditPayload::CheckResult {
                    check_kind: crate::verify::CheckKind::ToolProbe,
                    target: tool.clone(),
                    status: crate::verify::CheckStatus::Fail,
                    detail,
                })?;
            }
        }
    }
    Ok(Ok(()))
}

// --- execute -----------------------------------------------------------

fn valid_rel_path(path: &str) -> bool {
    !path.is_empty()
        && !path.starts_with('/')
        && !path.split('/').any(|seg| seg.is_empty() || seg == "." || seg == "..")
}

fn write_workspace_file(
    workspace: &Path,
    rel: &str,
    content: &str,
) -> Result<(), HarnessError> {
    let path = workspace.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| HarnessError::Io { path: parent.to_path_buf(), source: e })?;
    }
    std::fs::write(&path, content).map_err(|e| HarnessError::Io { path, source: e })
}

/// Replaces `${slot}` placeholders: output slots become their
/// instantiated path, input slots the first existing match.
fn expand_command(
    command: &[String],
    stage: &PlanStage,
    workspace: &Path,
) -> Result<Vec<String>, String> {
    let mut argv = Vec::with_capacity(command.len());
    for token in command {
        let mut expanded = String::new();
        let mut rest = token.as_str();
        while let Some(start) = rest.find("${") {
            expanded.push_str(&rest[..start]);
            let tail = &rest[start + 2..];
            let Some(end) = tail.find('}') else {
                return Err(format!("unterminated placeholder in {token:?}"));
            };
            let name = &tail[..end];
            if let Some(slot) = stage.outputs.iter().find(|s| s.name == name) {
                expanded.push_str(&crate::pathglob::instantiate(&slot.pattern));
            } else if let Some(slot) = stage.inputs.iter().find(|s| s.name == name) {
                let hits = glob_files(workspace, &slot.pattern);
                match hits.first() {
                    Some(hit) => expanded.push_str(&hit.to_string_lossy()),
                    None => {
                        return Err(format!(
                            "input slot {name} ({}) has no matching file",
                            slot.pattern
                        ))
                    }
                }
            } else {
                return Err(format!("unknown placeholder ${{{name}}}"));
            }
            rest = &tail[end + 1..];
        }
        expanded.push_str(rest);
        argv.push(expanded);
    }
    Ok(argv)
}

fn execute_stage(
    ctx: &mut RunCtx<'_>,
    stage: &PlanStage,
) -> Result<Result<(), String>, HarnessError> {
    ctx.emit(AuditPayload::StageBegin {
        stage_id: stage.stage_id.clone(),
        skill_id: stage.skill_id.as_ref().map(|id| id.as_str().to_string()),
    })?;
    let workspace = ctx.paths.workspace();
    let before = digest_tree(&workspace)?;
    let mut last_exit: Option<i32> = None;
    let mut failure: Option<String> = None;
    for step in &stage.steps {
        match step.mode {
            StepMode::Stub => {
                for write in &step.writes {
                    write_workspace_file(&workspace, &write.path, &write.content)?;
                }
                last_exit = Some(step.expected_exit);
            }
            StepMode::Execute => {
                match expand_command(&step.command, stage, &workspace) {
                    Err(message) => {
                        failure = Some(format!("step {}: {message}", step.step_id));
                    }
                    Ok(argv) => {
                        let exit = spawn_step(ctx, stage, step, &argv, &workspace)?;
                        last_exit = Some(exit);
                        if exit != step.expected_exit {
                            failure = Some(format!(
                                "step {} exited {exit}, expected {}",
                                step.step_id, step.expected_exit
                            ));
                        }
                    }
                }
            }
        }
        if failure.is_some() {
            break;
        }
    }
    if failure.is_none() {
        // Stub payloads cover any output slot the steps left unmatched.
        for (slot, write) in stage.outputs.iter().zip(&stage.stub_writes) {
            if glob_files(&workspace, &slot.pattern).is_empty() {
                write_workspace_file(&workspace, &write.path, &write.content)?;
            }
        }
        for slot in stage.outputs.iter().filter(|s| s.required) {
            if glob_files(&workspace, &slot.pattern).is_empty() {
                failure = Some(format!(
                    "required output {} ({}) was not produced",
                    slot.name, slot.pattern
                ));
                break;
            }
        }
    }
    let after = digest_tree(&workspace)?;
    for (path, digest) in &after {
        if before.get(path) == Some(digest) {
            continue;
        }
        let bytes = std::fs::metadata(workspace.join(path)).map(|m| m.len()).unwrap_or(0);
        ctx.emit(AuditPayload::ArtifactWritten {
            path: path.clone(),
            sha256: digest.clone(),
            bytes,
        })?;
    }
    match failure {
        Some(message) => {
            ctx.emit(AuditPayload::Error { message: message.clone() })?;
            ctx.emit(AuditPayload::StageEnd {
                stage_id: stage.stage_id.clone(),
                outcome: Outcome::Failed,
                exit_status: last_exit,
            })?;
            Ok(Err(message))
        }
        None => {
            ctx.emit(AuditPayload::StageEnd {
                stage_id: stage.stage_id.clone(),
                outcome: Outcome::Ok,
                exit_status: last_exit,
            })?;
            Ok(Ok(()))
        }
    }
}

fn spawn_step(
    ctx: &RunCtx<'_>,
    stage: &PlanStage,
    step: &super::plan::PlanStep,
    argv: &[String],
    workspace: &Path,
) -> Result<i32, HarnessError> {
    let log_base = ctx.paths.logs().join(format!("{}-{}", stage.stage_id, step.step_id));
    let open_log = |suffix: &str| {
        let path = log_base.with_extension(suffix);
        std::fs::File::create(&path).map_err(|e| HarnessError::Io { path, source: e })
    };
    let (program, args) = argv.split_first().expect("non-empty argv");
    let status = std::process::Command::new(program)
        .args(args)
        .current_dir(workspace)
        .stdin(std::process::Stdio::null())
        .stdout(open_log("out")?)
        .stderr(open_log("err")?)
        .status();
    match status {
        // Treat an unlaunchable program like a shell would: exit 127.
        Err(_) => Ok(127),
        Ok(status) => Ok(status.code().unwrap_or(-1)),
    }
}

// --- resume drift ------------------------------------------------------

/// Emits drift events for workspace and environment changes since the
/// checkpoint. Returns whether any workspace (not env) drift was seen.
fn check_drift(ctx: &mut RunCtx<'_>, checkpoint: &Checkpoint) -> Result<bool, HarnessError> {
    let current = digest_tree(&ctx.paths.workspace())?;
    let mut drifted = false;
    for (path, old) in &checkpoint.artifact_digests {
        match current.get(path) {
            None => {
                drifted = true;
                ctx.emit(AuditPayload::DriftNoted {
                    target: path.clone(),
                    change: DriftChange::Missing,
                    expected: old.clone(),
                    actual: String::new(),
                })?;
            }
            Some(new) if new != old => {
                drifted = true;
                ctx.emit(AuditPayload::DriftNoted {
                    target: path.clone(),
                    change: DriftChange::Modified,
                    expected: old.clone(),
                    actual: new.clone(),
                })?;
            }
            Some(_) => {}
        }
    }
    for (path, new) in &current {
        if !checkpoint.artifact_digests.contains_key(path) {
            drifted = true;
            ctx.emit(AuditPayload::DriftNoted {
                target: path.clone(),
                change: DriftChange::Unexpected,
                expected: String::new(),
                actual: new.clone(),
            })?;
        }
    }
    let manifest_path = ctx.paths.manifest();
    let manifest_digest = sha256_file(&manifest_path).unwrap_or_default();
    if manifest_digest != checkpoint.env_manifest_digest {
        drifted = true;
        ctx.emit(AuditPayload::DriftNoted {
            target: "manifest.json".to_string(),
            change: DriftChange::Modified,
            expected: checkpoint.env_manifest_digest.clone(),
            actual: manifest_digest,
        })?;
    } else if let Ok(stored) = read_json::<EnvManifest>(&manifest_path) {
        // Environment drift is informational only and never fails a run.
        let (fresh, _) = capture_env(&stored.capture);
        for (what, old, new) in env_drift(&stored, &fresh) {
            ctx.emit(AuditPayload::DriftNoted {
                target: what,
                change: DriftChange::Env,
                expected: old,
                actual: new,
            })?;
        }
    }
    Ok(drifted)
}
