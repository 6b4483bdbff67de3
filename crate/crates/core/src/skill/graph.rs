//! Dependency DAG over skill manifests: validation, closures, plans.

use super::manifest::{Layer, SkillId, SkillManifest};
use super::SkillError;
use crate::pathglob;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Immutable skill dependency graph. Edge `(from, to)` means `from`
/// depends on `to`. Edges exist only for dependencies that resolve;
/// unresolved dependency ids surface as validation findings.
#[derive(Debug, Clone, Default)]
pub struct SkillGraph {
    nodes: BTreeMap<SkillId, SkillManifest>,
    edges: BTreeSet<(SkillId, SkillId)>,
}

impl SkillGraph {
    pub fn from_manifests(manifests: impl IntoIterator<Item = SkillManifest>) -> Self {
        let nodes: BTreeMap<SkillId, SkillManifest> = manifests
            .into_iter()
            .map(|m| (m.id.clone(), m))
            .collect();
        let mut edges = BTreeSet::new();
        for (id, manifest) in &nodes {
            for dep in &manifest.dependencies {
                if nodes.contains_key(dep) {
                    edges.insert((id.clone(), dep.clone()));
                }
            }
        }
        SkillGraph { nodes, edges }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &SkillId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn get(&self, id: &SkillId) -> Option<&SkillManifest> {
        self.nodes.get(id)
    }

    /// Manifests in ascending id order.
    pub fn manifests(&self) -> impl Iterator<Item = &SkillManifest> {
        self.nodes.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &SkillId> {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(SkillId, SkillId)> {
        self.edges.iter()
    }

    /// Resolved dependencies of `id`, ascending.
    pub fn dependencies_of(&self, id: &SkillId) -> Vec<SkillId> {
        self.edges
            .iter()
            .filter(|(from, _)| from == id)
            .map(|(_, to)| to.clone())
            .collect()
    }

    /// Reverse query: skills that depend on `id`, ascending. Exposed for
    /// impact analysis; never used by execution planning.
    pub fn dependents_of(&self, id: &SkillId) -> Vec<SkillId> {
        self.nodes
            .keys()
            .filter(|from| self.edges.contains(&((*from).clone(), id.clone())))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// One validation problem. Cycle findings carry the full cycle path in
/// the message and name the smallest id on the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub skill_id: SkillId,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Check every graph invariant at once. All problems come back as
/// findings so callers can display the complete picture; the function is
/// pure and idempotent.
pub fn validate_graph(graph: &SkillGraph) -> ValidationReport {
    let mut findings = Vec::new();
    let mut push = |skill_id: &SkillId, message: String| {
        findings.push(Finding {
            severity: Severity::Error,
            skill_id: skill_id.clone(),
            message,
        });
    };

    for manifest in graph.manifests() {
        // dependency resolution
        for dep in &manifest.dependencies {
            if !graph.contains(dep) {
                push(
                    &manifest.id,
                    format!("dependency {dep:?} does not resolve to any skill"),
                );
            }
        }
        // kind present exactly when subagent
        match (manifest.layer, manifest.kind.is_some()) {
            (Layer::Subagent, false) => {
                push(&manifest.id, "subagent skill must declare a kind".into())
            }
            (Layer::Subagent, true) => {}
            (_, true) => push(
                &manifest.id,
                format!("{} skill must not declare a kind", manifest.layer.dir_name()),
            ),
            (_, false) => {}
        }
        // slot patterns stay inside the workspace
        for slot in manifest.inputs.iter().chain(manifest.outputs.iter()) {
            if let Err(e) = pathglob::validate_pattern(&slot.pattern) {
                push(&manifest.id, format!("slot {:?}: {e}", slot.name));
            }
        }
        // step ids unique, placeholders resolve to declared slots
        let slots: BTreeSet<&str> = manifest.slot_names().into_iter().collect();
        let mut seen_steps = BTreeSet::new();
        for step in &manifest.steps {
            if !seen_steps.insert(step.step_id.as_str()) {
                push(
                    &manifest.id,
                    format!("duplicate step id {:?}", step.step_id),
                );
            }
            for ph in step.placeholders() {
                if !slots.contains(ph.as_str()) {
                    push(
                        &manifest.id,
                        format!(
                            "step {:?}: placeholder ${{{ph}}} names no declared slot",
                            step.step_id
                        ),
                    );
                }
            }
        }
    }

    // layer flow: rank(from) >= rank(to); same layer only within subagent
    for (from, to) in graph.edges() {
        let (fl, tl) = (
            graph.get(from).expect("edge endpoint").layer,
            graph.get(to).expect("edge endpoint").layer,
        );
        if fl.rank() < tl.rank() {
            push(
                from,
                format!(
                    "layer flow violation: {} skill {from} depends on {} skill {to}",
                    fl.dir_name(),
                    tl.dir_name()
                ),
            );
        } else if fl == tl && fl != Layer::Subagent {
            push(
                from,
                format!(
                    "same-layer dependency {from} -> {to} is only permitted between subagent skills"
                ),
            );
        }
    }

    for cycle in find_cycles(graph) {
        let anchor = cycle.iter().min().expect("non-empty cycle").clone();
        let mut path: Vec<String> = cycle.iter().map(|id| id.to_string()).collect();
        path.push(cycle[0].to_string());
        findings.push(Finding {
            severity: Severity::Error,
            skill_id: anchor,
            message: format!("dependency cycle: {}", path.join(" -> ")),
        });
    }

    findings.sort_by(|a, b| (&a.skill_id, &a.message).cmp(&(&b.skill_id, &b.message)));
    ValidationReport { findings }
}

/// Every distinct elementary cycle reachable by DFS back edges, each
/// normalized to start at its smallest id.
fn find_cycles(graph: &SkillGraph) -> Vec<Vec<SkillId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut color: BTreeMap<&SkillId, Color> =
        graph.ids().map(|id| (id, Color::White)).collect();
    let mut stack: Vec<&SkillId> = Vec::new();
    let mut cycles: BTreeSet<Vec<SkillId>> = BTreeSet::new();

    fn dfs<'a>(
        graph: &'a SkillGraph,
        node: &'a SkillId,
        color: &mut BTreeMap<&'a SkillId, Color>,
        stack: &mut Vec<&'a SkillId>,
        cycles: &mut BTreeSet<Vec<SkillId>>,
    ) {
        color.insert(node, Color::Grey);
        stack.push(node);
        for dep in graph.dependencies_of(node) {
            let dep_ref = graph.ids().find(|id| **id == dep).expect("edge endpoint");
            match color[dep_ref] {
                Color::White => dfs(graph, dep_ref, color, stack, cycles),
                Color::Grey => {
                    let start = stack.iter().position(|n| **n == dep).expect("on stack");
                    let mut cycle: Vec<SkillId> =
                        stack[start..].iter().map(|id| (*id).clone()).collect();
                    // rotate so the smallest id leads, for stable dedupe
                    let min_pos = cycle
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    cycle.rotate_left(min_pos);
                    cycles.insert(cycle);
                }
                Color::Black => {}
            }
        }
        stack.pop();
        color.insert(node, Color::Black);
    }

    let ids: Vec<&SkillId> = graph.ids().collect();
    for id in ids {
        if color[id] == Color::White {
            dfs(graph, id, &mut color, &mut stack, &mut cycles);
        }
    }
    cycles.into_iter().collect()
}

/// The minimal subgraph needed to run `targets`: the targets plus all
/// transitive dependencies, with every edge among them.
pub fn execution_closure(
    graph: &SkillGraph,
    targets: &[SkillId],
) -> Result<SkillGraph, SkillError> {
    let mut keep: BTreeSet<SkillId> = BTreeSet::new();
    let mut frontier: Vec<SkillId> = Vec::new();
    for target in targets {
        if !graph.contains(target) {
            return Err(SkillError::UnknownTarget(target.to_string()));
        }
        if keep.insert(target.clone()) {
            frontier.push(target.clone());
        }
    }
    while let Some(node) = frontier.pop() {
        for dep in graph.dependencies_of(&node) {
            if keep.insert(dep.clone()) {
                frontier.push(dep);
            }
        }
    }
    let manifests = keep
        .iter()
        .map(|id| graph.get(id).expect("closure node").clone());
    Ok(SkillGraph::from_manifests(manifests))
}

/// Deterministic execution order: dependencies before dependents, ties
/// broken by ascending skill id.
pub fn topological_plan(closure: &SkillGraph) -> Result<Vec<SkillId>, SkillError> {
    let mut remaining_deps: BTreeMap<SkillId, BTreeSet<SkillId>> = closure
        .ids()
        .map(|id| {
            (
                id.clone(),
                closure.dependencies_of(id).into_iter().collect(),
            )
        })
        .collect();
    let mut ready: BTreeSet<SkillId> = remaining_deps
        .iter()
        .filter(|(_, deps)| deps.is_empty())
        .map(|(id, _)| id.clone())
        .collect();
    for id in &ready {
        remaining_deps.remove(id);
    }

    let mut plan = Vec::with_capacity(closure.len());
    while let Some(next) = ready.iter().next().cloned() {
        ready.remove(&next);
        plan.push(next.clone());
        let now_ready: Vec<SkillId> = remaining_deps
            .iter_mut()
            .filter_map(|(id, deps)| {
                deps.remove(&next);
                deps.is_empty().then(|| id.clone())
            })
            .collect();
        for id in now_ready {
            remaining_deps.remove(&id);
            ready.insert(id);
        }
    }

    if !remaining_deps.is_empty() {
        // unreachable after validation; report one cycle among the leftovers
        let cycle = find_cycles(closure)
            .into_iter()
            .next()
            .unwrap_or_else(|| remaining_deps.keys().cloned().collect());
        return Err(SkillError::Cycle(
            cycle.iter().map(|id| id.to_string()).collect(),
        ));
    }
    Ok(plan)
}
