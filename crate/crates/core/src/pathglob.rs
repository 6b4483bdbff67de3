//! Workspace-relative glob matching with pinned semantics.
//!
//! Patterns and paths are `/`-separated relative paths. `**` as a whole
//! segment matches zero or more segments; `*` matches any run of
//! characters within one segment; `?` matches one character. Matching is
//! case-sensitive. These semantics are fixed so check counts reproduce
//! bit-exactly across platforms.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern {0:?} must be relative (no leading '/')")]
    Absolute(String),
    #[error("pattern {0:?} must not contain '..' segments")]
    ParentSegment(String),
    #[error("pattern {0:?} is empty")]
    Empty(String),
}

/// Reject absolute patterns, `..` segments, and empty patterns.
pub fn validate_pattern(pattern: &str) -> Result<(), PatternError> {
    if pattern.is_empty() {
        return Err(PatternError::Empty(pattern.to_string()));
    }
    if pattern.starts_with('/') {
        return Err(PatternError::Absolute(pattern.to_string()));
    }
    if pattern.split('/').any(|seg| seg == "..") {
        return Err(PatternError::ParentSegment(pattern.to_string()));
    }
    Ok(())
}

/// Match a relative path against a pattern.
pub fn matches(pattern: &str, path: &str) -> bool {
    let pat: Vec<&str> = pattern.split('/').collect();
    let segs: Vec<&str> = path.split('/').collect();
    match_segments(&pat, &segs)
}

fn match_segments(pat: &[&str], segs: &[&str]) -> bool {
    if pat.is_empty() {
        return segs.is_empty();
    }
    if pat[0] == "**" {
        // zero or more path segments
        (0..=segs.len()).any(|skip| match_segments(&pat[1..], &segs[skip..]))
    } else if segs.is_empty() {
        false
    } else if match_one(pat[0], segs[0]) {
        match_segments(&pat[1..], &segs[1..])
    } else {
        false
    }
}

/// Single-segment match: `*` spans characters, `?` one character.
fn match_one(pat: &str, s: &str) -> bool {
    let p: Vec<char> = pat.chars().collect();
    let t: Vec<char> = s.chars().collect();
    // iterative wildcard match with star backtracking
    let (mut pi, mut ti) = (0usize, 0usize);
    let (mut star, mut star_t) = (None::<usize>, 0usize);
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            star_t = ti;
            pi += 1;
        } else if let Some(sp) = star {
            pi = sp + 1;
            star_t += 1;
            ti = star_t;
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

/// All files under `root` whose relative path matches `pattern`, sorted.
pub fn glob_files(root: &Path, pattern: &str) -> Vec<PathBuf> {
    let mut hits = BTreeSet::new();
    for entry in walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .flatten()
    {
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(rel) = entry.path().strip_prefix(root) else {
            continue;
        };
        let Some(rel) = rel.to_str() else { continue };
        let rel = rel.replace(std::path::MAIN_SEPARATOR, "/");
        if matches(pattern, &rel) {
            hits.insert(PathBuf::from(rel));
        }
    }
    hits.into_iter().collect()
}

/// Turn a pattern into one concrete relative path that matches it:
/// `**/` segments collapse to nothing, `*` becomes `stub`, `?` becomes `x`.
/// Used by stub steps to materialize declared outputs.
pub fn instantiate(pattern: &str) -> String {
    let segs: Vec<String> = pattern
        .split('/')
        .filter(|seg| *seg != "**")
        .map(|seg| seg.replace('*', "stub").replace('?', "x"))
        .collect();
    segs.join("/")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn star_stays_within_segment() {
        assert!(matches("derivatives/*.tsv", "derivatives/roi.tsv"));
        assert!(!matches("derivatives/*.tsv", "derivatives/sub/roi.tsv"));
        assert!(!matches("*", "a/b"));
    }

    #[test]
    fn double_star_crosses_and_matches_zero() {
        let pat = "derivatives/**/sub-*_roi.tsv";
        assert!(matches(pat, "derivatives/sub-01_roi.tsv"));
        assert!(matches(pat, "derivatives/a/b/sub-01_roi.tsv"));
        assert!(!matches(pat, "raw/sub-01_roi.tsv"));
    }

    #[test]
    fn case_sensitive() {
        assert!(!matches("Reports/*.txt", "reports/a.txt"));
    }

    #[test]
    fn question_mark_is_one_char() {
        assert!(matches("sub-??", "sub-01"));
        assert!(!matches("sub-??", "sub-1"));
    }

    #[test]
    fn pattern_validation() {
        assert!(validate_pattern("a/b/*.csv").is_ok());
        assert_eq!(
            validate_pattern("/abs").unwrap_err(),
            PatternError::Absolute("/abs".into())
        );
        assert_eq!(
            validate_pattern("a/../b").unwrap_err(),
            PatternError::ParentSegment("a/../b".into())
        );
        assert!(validate_pattern("").is_err());
    }

    #[test]
    fn instantiated_path_matches_its_pattern() {
        for pat in [
            "derivatives/**/sub-*_roi.tsv",
            "tables/metadata.tsv",
            "reports/*.txt",
            "a/**/b/??.csv",
        ] {
            let inst = instantiate(pat);
            assert!(matches(pat, &inst), "{pat} vs {inst}");
        }
    }

    #[test]
    fn glob_files_returns_sorted_relative_hits() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("t/a")).unwrap();
        fs::write(dir.path().join("t/z.csv"), "").unwrap();
        fs::write(dir.path().join("t/a/b.csv"), "").unwrap();
        fs::write(dir.path().join("t/a/b.txt"), "").unwrap();
        let hits = glob_files(dir.path(), "t/**/*.csv");
        assert_eq!(
            hits,
            vec![PathBuf::from("t/a/b.csv"), PathBuf::from("t/z.csv")]
        );
    }

    proptest::proptest! {
        // brute-force segment matcher as oracle for the backtracking one
        #[test]
        fn segment_matcher_agrees_with_recursive_oracle(
            pat in "[ab*?]{0,8}",
            s in "[ab]{0,8}",
        ) {
            fn oracle(p: &[char], t: &[char]) -> bool {
                match (p.first(), t.first()) {
                    (None, None) => true,
                    (None, Some(_)) => false,
                    (Some('*'), _) => {
                        oracle(&p[1..], t) || (!t.is_empty() && oracle(p, &t[1..]))
                    }
                    (Some('?'), Some(_)) => oracle(&p[1..], &t[1..]),
                    (Some(c), Some(d)) if c == d => oracle(&p[1..], &t[1..]),
                    _ => false,
                }
            }
            let p: Vec<char> = pat.chars().collect();
            let t: Vec<char> = s.chars().collect();
            proptest::prop_assert_eq!(match_one(&pat, &s), oracle(&p, &t));
        }
    }
}
