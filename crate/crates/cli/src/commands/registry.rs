//! `validate` and `plan`: registry checks and execution ordering.

use std::path::Path;

use clawharness_core::skill::{
    execution_closure, load_registry, topological_plan, validate_graph, Severity, SkillGraph,
    SkillId,
};

use crate::config::{domain, usage, CliError, GlobalConfig};

/// Loads and validates the registry; returns the graph only when it is
/// free of validation errors. Findings are printed to stdout because
/// they are the command's data, not a diagnostic.
pub fn load_valid_registry(dir: &Path, print_findings: bool) -> Result<SkillGraph, CliError> {
    let graph = load_registry(dir).map_err(domain)?;
    let report = validate_graph(&graph);
    if print_findings {
        for finding in &report.findings {
            let severity = match finding.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            println!("{severity}: {}: {}", finding.skill_id, finding.message);
        }
    }
    if report.has_errors() {
        let n = report.errors().count();
        return Err(domain(format!("registry {} has {n} validation error(s)", dir.display())));
    }
    Ok(graph)
}

pub fn validate(config: &GlobalConfig, registry_root: Option<&Path>) -> Result<(), CliError> {
    let dir = registry_root.unwrap_or(&config.registry_root);
    let graph = load_valid_registry(dir, true)?;
    println!("registry ok: {} skill(s), {} edge(s)", graph.len(), graph.edge_count());
    Ok(())
}

pub fn plan(config: &GlobalConfig, targets: &[String]) -> Result<(), CliError> {
    let graph = load_valid_registry(&config.registry_root, false)?;
    let ids: Vec<SkillId> = targets
        .iter()
        .map(|t| SkillId::new(t.clone()).map_err(usage))
        .collect::<Result<_, _>>()?;
    let closure = execution_closure(&graph, &ids).map_err(domain)?;
    let order = topological_plan(&closure).map_err(domain)?;
    for id in &order {
        println!("{id}");
    }
    Ok(())
}
