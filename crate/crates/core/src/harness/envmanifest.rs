//! Environment manifest: what the run executed on.

use std::collections::BTreeMap;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::timeutil::Timestamp;

/// What to record about the environment. The capture config is persisted
/// inside the manifest so a resume can re-capture the same view.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvCaptureConfig {
    /// Environment variables recorded by exact name. Unset variables are
    /// simply absent from the manifest.
    #[serde(default)]
    pub env_allowlist: Vec<String>,
    /// Tool name to version-probe argv. The first stdout line of a
    /// successful probe is recorded.
    #[serde(default)]
    pub tool_probes: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvManifest {
    pub captured_at: Timestamp,
    /// `<os>-<arch>` of the running host.
    pub os: String,
    pub tool_versions: BTreeMap<String, String>,
    pub env_vars: BTreeMap<String, String>,
    pub capture: EnvCaptureConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeFailure {
    pub tool: String,
    pub detail: String,
}

/// Captures the manifest. Probe failures are returned, not fatal: a
/// missing tool is a fact about the environment worth recording.
pub fn capture_env(config: &EnvCaptureConfig) -> (EnvManifest, Vec<ProbeFailure>) {
    let mut tool_versions = BTreeMap::new();
    let mut failures = Vec::new();
    for (tool, argv) in &config.tool_probes {
        match probe(argv) {
            Ok(version) => {
                tool_versions.insert(tool.clone(), version);
            }
            Err(detail) => failures.push(ProbeFailure { tool: tool.clone(), detail }),
        }
    }
    let mut env_vars = BTreeMap::new();
    for name in &config.env_allowlist {
        if let Ok(value) = std::env::var(name) {
            env_vars.insert(name.clone(), value);
        }
    }
    let manifest = EnvManifest {
        captured_at: Timestamp::now(),
        os: format!("{}-{}", std::env::consts::OS, std::env::consts::ARCH),
        tool_versions,
        env_vars,
        capture: config.clone(),
    };
    (manifest, failures)
}

fn probe(argv: &[String]) -> Result<String, String> {
    let (program, args) = argv.split_first().ok_or("empty probe argv")?;
    let output = Command::new(program).args(args).output().map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!("probe exited {}", output.status));
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    Ok(stdout.lines().next().unwrap_or("").trim().to_string())
}

/// Differences between a stored manifest and a fresh capture, as
/// `(what, old value, new value)`. Absent values render as `""`.
pub fn env_drift(old: &EnvManifest, new: &EnvManifest) -> Vec<(String, String, String)> {
    let mut drifts = Vec::new();
    if old.os != new.os {
        drifts.push(("os".to_string(), old.os.clone(), new.os.clone()));
    }
    let map_drift = |prefix: &str,
                     old_map: &BTreeMap<String, String>,
                     new_map: &BTreeMap<String, String>,
                     drifts: &mut Vec<(String, String, String)>| {
        let keys: std::collections::BTreeSet<&String> =
            old_map.keys().chain(new_map.keys()).collect();
        for key in keys {
            let old_value = old_map.get(key).cloned().unwrap_or_default();
            let new_value = new_map.get(key).cloned().unwrap_or_default();
            if old_value != new_value {
                drifts.push((format!("{prefix}:{key}"), old_value, new_value));
            }
        }
    };
    map_drift("tool", &old.tool_versions, &new.tool_versions, &mut drifts);
    map_drift("env", &old.env_vars, &new.env_vars, &mut drifts);
    drifts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capture_records_allowlisted_vars_and_skips_unset() {
        std::env::set_var("CLAWHARNESS_TEST_MARKER", "42");
        let config = EnvCaptureConfig {
            env_allowlist: vec![
                "CLAWHARNESS_TEST_MARKER".to_string(),
                "CLAWHARNESS_TEST_UNSET".to_string(),
            ],
            tool_probes: BTreeMap::new(),
        };
        let (manifest, failures) = capture_env(&config);
        assert!(failures.is_empty());
        assert_eq!(manifest.env_vars.get("CLAWHARNESS_TEST_MARKER").unwrap(), "42");
        assert!(!manifest.env_vars.contains_key("CLAWHARNESS_TEST_UNSET"));
        assert!(manifest.os.contains('-'));
        assert_eq!(manifest.capture, config);
    }

    #[test]
    fn probes_record_versions_and_report_failures() {
        let config = EnvCaptureConfig {
            env_allowlist: vec![],
            tool_probes: BTreeMap::from([
                ("sh".to_string(), vec!["sh".to_string(), "-c".to_string(), "echo sh-ok".to_string()]),
                ("ghost".to_string(), vec!["definitely-not-a-real-tool-7q".to_string()]),
            ]),
        };
        let (manifest, failures) = capture_env(&config);
        assert_eq!(manifest.tool_versions.get("sh").unwrap(), "sh-ok");
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].tool, "ghost");
    }

    #[test]
    fn drift_reports_changed_and_removed_values() {
        let config = EnvCaptureConfig::default();
        let (mut old, _) = capture_env(&config);
        let (mut new, _) = capture_env(&config);
        old.tool_versions.insert("fsl".into(), "6.0.6".into());
        new.tool_versions.insert("fsl".into(), "6.0.7".into());
        old.env_vars.insert("LANG".into(), "C".into());
        let drifts = env_drift(&old, &new);
        assert_eq!(
            drifts,
            vec![
                ("tool:fsl".to_string(), "6.0.6".to_string(), "6.0.7".to_string()),
                ("env:LANG".to_string(), "C".to_string(), String::new()),
            ]
        );
    }
}
