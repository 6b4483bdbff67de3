//! The individual verification passes.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::digest::sha256_file;
use crate::pathglob::{glob_files, validate_pattern};
use crate::skill::ArtifactSlot;

use super::{
    CheckEntry, CheckKind, CheckStatus, NumericFinding, QcKind, QcRule, ValueClass,
    VerificationReport, VerificationSpec, VerifyError,
};

/// Accumulates check entries and findings before the report is sealed.
#[derive(Default)]
struct Findings {
    checks: Vec<CheckEntry>,
    numeric: Vec<NumericFinding>,
}

/// Runs every configured check against one workspace. Entry order is
/// deterministic: expected artifacts in spec order, numeric screening in
/// glob then path order, checksum entries in manifest order, QC in rule
/// then path order.
pub fn verify_workspace(
    spec: &VerificationSpec,
    workspace: &Path,
) -> Result<VerificationReport, VerifyError> {
    let mut out = Findings::default();
    check_expected_artifacts(&spec.expected, workspace, &mut out)?;
    scan_numeric_artifacts(&spec.numeric_screen, workspace, &mut out)?;
    if let Some(manifest) = &spec.checksum_manifest {
        checksum_validate(manifest, workspace, &mut out)?;
    }
    apply_qc_rules(&spec.qc_rules, workspace, &mut out)?;
    Ok(VerificationReport::new(out.checks, out.numeric))
}

fn entry(kind: CheckKind, target: &str, status: CheckStatus, detail: String) -> CheckEntry {
    CheckEntry { kind, target: target.to_string(), status, detail }
}

fn check_expected_artifacts(
    expected: &[ArtifactSlot],
    workspace: &Path,
    out: &mut Findings,
) -> Result<(), VerifyError> {
    for slot in expected {
        validate_pattern(&slot.pattern)?;
        let hits = glob_files(workspace, &slot.pattern);
        let check = if hits.is_empty() {
            if slot.required {
                entry(
                    CheckKind::ExpectedArtifact,
                    &slot.pattern,
                    CheckStatus::Fail,
                    format!("required slot {} has no matching file", slot.name),
                )
            } else {
                entry(
                    CheckKind::ExpectedArtifact,
                    &slot.pattern,
                    CheckStatus::Skipped,
                    format!("optional slot {} has no matching file", slot.name),
                )
            }
        } else {
            entry(
                CheckKind::ExpectedArtifact,
                &slot.pattern,
                CheckStatus::Pass,
                format!("slot {} matched {} file(s)", slot.name, hits.len()),
            )
        };
        out.checks.push(check);
    }
    Ok(())
}

fn delimiter_for(path: &str) -> u8 {
    if path.ends_with(".tsv") {
        b'\t'
    } else {
        b','
    }
}

fn scan_numeric_artifacts(
    globs: &[String],
    workspace: &Path,
    out: &mut Findings,
) -> Result<(), VerifyError> {
    for pattern in globs {
        validate_pattern(pattern)?;
        let files = glob_files(workspace, pattern);
        if files.is_empty() {
            out.checks.push(entry(
                CheckKind::NumericScreen,
                pattern,
                CheckStatus::Skipped,
                "no files match".to_string(),
            ));
            continue;
        }
        for rel in files {
            let rel = rel.to_string_lossy().into_owned();
            scan_one_table(&rel, workspace, out);
        }
    }
    Ok(())
}

fn classify(value: f64) -> ValueClass {
    if value.is_nan() {
        ValueClass::Nan
    } else if value > 0.0 {
        ValueClass::PosInf
    } else {
        ValueClass::NegInf
    }
}

/// Screens one table for cells that parse as NaN or infinity. Rows are
/// counted from 1 including any header row; a header name is attached to
/// findings when the first row's cell is itself non-numeric.
fn scan_one_table(rel: &str, workspace: &Path, out: &mut Findings) {
    let bytes = match fs::read(workspace.join(rel)) {
        Ok(bytes) => bytes,
        Err(e) => {
            out.checks.push(entry(
                CheckKind::NumericScreen,
                rel,
                CheckStatus::Fail,
                format!("unreadable: {e}"),
            ));
            return;
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter_for(rel))
        .from_reader(bytes.as_slice());
    let mut header: Option<csv::StringRecord> = None;
    let mut found = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = match record {
            Ok(record) => record,
            Err(e) => {
                out.checks.push(entry(
                    CheckKind::NumericScreen,
                    rel,
                    CheckStatus::Fail,
                    format!("row {}: {e}", idx + 1),
                ));
                return;
            }
        };
        let row = (idx + 1) as u64;
        for (ci, cell) in record.iter().enumerate() {
            let token = cell.trim();
            if token.is_empty() {
                continue;
            }
            let Ok(value) = token.parse::<f64>() else { continue };
            if value.is_finite() {
                continue;
            }
            let field = header.as_ref().and_then(|h| {
                let name = h.get(ci)?.trim();
                if name.is_empty() || name.parse::<f64>().is_ok() {
                    None
                } else {
                    Some(name.to_string())
                }
            });
            out.numeric.push(NumericFinding {
                path: rel.to_string(),
                row,
                column: (ci + 1) as u64,
                field,
                value: token.to_string(),
                value_class: classify(value),
            });
            found += 1;
        }
        if idx == 0 {
            header = Some(record);
        }
    }
    let check = if found > 0 {
        entry(
            CheckKind::NumericScreen,
            rel,
            CheckStatus::Fail,
            format!("{found} non-finite value(s)"),
        )
    } else {
        entry(CheckKind::NumericScreen, rel, CheckStatus::Pass, "clean".to_string())
    };
    out.checks.push(check);
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

/// Validates files against a digest manifest: one JSON record
/// `{"path": <workspace-relative>, "sha256": <64 hex>}` per line.
fn checksum_validate(
    manifest_rel: &str,
    workspace: &Path,
    out: &mut Findings,
) -> Result<(), VerifyError> {
    let manifest_path = workspace.join(manifest_rel);
    let text = match fs::read_to_string(&manifest_path) {
        Ok(text) => text,
        Err(_) => {
            out.checks.push(entry(
                CheckKind::Checksum,
                manifest_rel,
                CheckStatus::Fail,
                "checksum manifest missing".to_string(),
            ));
            return Ok(());
        }
    };
    for (lineno, line) in text.lines().enumerate() {
        let bad = |detail: String| VerifyError::BadManifest {
            path: manifest_path.clone(),
            line: lineno + 1,
            detail,
        };
        let record: ManifestEntry =
            serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if record.sha256.len() != 64 || !record.sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad("sha256 is not 64 hex characters".to_string()));
        }
        if record.path.is_empty() {
            return Err(bad("empty path".to_string()));
        }
        let expected = record.sha256.to_ascii_lowercase();
        let check = match sha256_file(&workspace.join(&record.path)) {
            Ok(actual) if actual == expected => {
                entry(CheckKind::Checksum, &record.path, CheckStatus::Pass, "digest ok".to_string())
            }
            Ok(actual) => entry(
                CheckKind::Checksum,
                &record.path,
                CheckStatus::Fail,
                format!("digest mismatch: expected {expected}, actual {actual}"),
            ),
            Err(_) => entry(
                CheckKind::Checksum,
                &record.path,
                CheckStatus::Fail,
                "file missing".to_string(),
            ),
        };
        out.checks.push(check);
    }
    Ok(())
}

fn apply_qc_rules(
    rules: &[QcRule],
    workspace: &Path,
    out: &mut Findings,
) -> Result<(), VerifyError> {
    for rule in rules {
        validate_pattern(&rule.pattern)?;
        let files = glob_files(workspace, &rule.pattern);
        if files.is_empty() {
            out.checks.push(entry(
                CheckKind::Qc,
                &rule.pattern,
                CheckStatus::Skipped,
                format!("{}: no files match", rule.rule),
            ));
            continue;
        }
        for rel in files {
            let rel = rel.to_string_lossy().into_owned();
            let check = apply_one_rule(&rule.rule, &rel, workspace);
            out.checks.push(check);
        }
    }
    Ok(())
}

fn apply_one_rule(rule: &QcKind, rel: &str, workspace: &Path) -> CheckEntry {
    let path = workspace.join(rel);
    let fail = |detail: String| entry(CheckKind::Qc, rel, CheckStatus::Fail, detail);
    let pass = |detail: String| entry(CheckKind::Qc, rel, CheckStatus::Pass, detail);
    match rule {
        QcKind::Nonempty => match fs::metadata(&path) {
            Ok(meta) if meta.len() > 0 => pass(format!("{rule}: {} byte(s)", meta.len())),
            Ok(_) => fail(format!("{rule}: file is empty")),
            Err(e) => fail(format!("{rule}: unreadable: {e}")),
        },
        QcKind::ParsesAsTable => match read_strict_table(&path, rel) {
            Ok(rows) if rows > 0 => pass(format!("{rule}: {rows} row(s)")),
            Ok(_) => fail(format!("{rule}: no rows")),
            Err(detail) => fail(format!("{rule}: {detail}")),
        },
        QcKind::FieldPresent(name) => {
            let bytes = match fs::read(&path) {
                Ok(bytes) => bytes,
                Err(e) => return fail(format!("{rule}: unreadable: {e}")),
            };
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .delimiter(delimiter_for(rel))
                .from_reader(bytes.as_slice());
            match reader.headers() {
                Ok(headers) if headers.iter().any(|h| h.trim() == name) => {
                    pass(format!("{rule}: present"))
                }
                Ok(_) => fail(format!("{rule}: field not present")),
                Err(e) => fail(format!("{rule}: {e}")),
            }
        }
    }
}

/// Strict tabular parse: known extension, consistent field counts, no
/// hard csv errors. Returns the record count.
fn read_strict_table(path: &Path, rel: &str) -> Result<usize, String> {
    if !rel.ends_with(".csv") && !rel.ends_with(".tsv") {
        return Err("not a tabular extension".to_string());
    }
    let bytes = fs::read(path).map_err(|e| format!("unreadable: {e}"))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .delimiter(delimiter_for(rel))
        .from_reader(bytes.as_slice());
    let mut rows = 0usize;
    for record in reader.records() {
        record.map_err(|e| e.to_string())?;
        rows += 1;
    }
    Ok(rows)
}
