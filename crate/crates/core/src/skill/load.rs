//! Registry loading: one `.skill` file per skill under
//! `<registry_root>/<layer>/<id>.skill`.

use super::graph::SkillGraph;
use super::manifest::{SkillId, SkillManifest};
use super::SkillError;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Load every `*.skill` manifest found under `root_dir` (recursively)
/// into an unvalidated graph. Layer subdirectories are a filing
/// convention; the authoritative layer is the manifest's own field.
pub fn load_registry(root_dir: &Path) -> Result<SkillGraph, SkillError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in walkdir::WalkDir::new(root_dir).sort_by_file_name() {
        let entry = entry.map_err(|e| SkillError::Unreadable {
            path: e.path().map(Path::to_path_buf).unwrap_or_else(|| root_dir.to_path_buf()),
            source: std::io::Error::other(e.to_string()),
        })?;
        if entry.file_type().is_file()
            && entry.path().extension().is_some_and(|ext| ext == "skill")
        {
            files.push(entry.path().to_path_buf());
        }
    }

    let mut seen: BTreeMap<SkillId, PathBuf> = BTreeMap::new();
    let mut manifests = Vec::with_capacity(files.len());
    for path in files {
        let manifest = parse_manifest(&path)?;
        if let Some(first) = seen.get(&manifest.id) {
            return Err(SkillError::DuplicateId {
                id: manifest.id.to_string(),
                first: first.clone(),
                second: path,
            });
        }
        seen.insert(manifest.id.clone(), path);
        manifests.push(manifest);
    }
    Ok(SkillGraph::from_manifests(manifests))
}

fn parse_manifest(path: &Path) -> Result<SkillManifest, SkillError> {
    let text = fs::read_to_string(path).map_err(|e| SkillError::Unreadable {
        path: path.to_path_buf(),
        source: e,
    })?;
    let manifest: SkillManifest =
        serde_json::from_str(&text).map_err(|e| SkillError::Parse {
            path: path.to_path_buf(),
            field: field_path_of(&e),
            detail: e.to_string(),
        })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    if stem != manifest.id.as_str() {
        return Err(SkillError::Parse {
            path: path.to_path_buf(),
            field: "id".into(),
            detail: format!("id {:?} does not match file name", manifest.id.as_str()),
        });
    }
    Ok(manifest)
}

// serde_json errors carry line/column, not a field path; the message
// usually names the offending field, so surface position as the path.
fn field_path_of(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}
