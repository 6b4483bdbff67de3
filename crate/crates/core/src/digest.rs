//! SHA-256 content digests, lowercase hex.
//!
//! Digests cover raw file bytes. `digest_tree` snapshots a whole workspace
//! as a sorted map of workspace-relative paths, which is the unit the
//! checkpoint and drift machinery compares.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum DigestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("non-unicode path under {0}")]
    NonUnicodePath(PathBuf),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex(&hasher.finalize())
}

pub fn sha256_file(path: &Path) -> Result<String, DigestError> {
    let mut file = File::open(path).map_err(|e| DigestError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| DigestError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

/// Digest every file under `root`, keyed by `/`-separated relative path.
/// Directories themselves are not recorded; an empty tree yields an empty map.
pub fn digest_tree(root: &Path) -> Result<BTreeMap<String, String>, DigestError> {
    let mut out = BTreeMap::new();
    if !root.exists() {
        return Ok(out);
    }
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| DigestError::Io {
            path: root.to_path_buf(),
            source: io::Error::other(e),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir stays under root");
        let rel = rel
            .to_str()
            .ok_or_else(|| DigestError::NonUnicodePath(entry.path().to_path_buf()))?
            .replace(std::path::MAIN_SEPARATOR, "/");
        out.insert(rel, sha256_file(entry.path())?);
    }
    Ok(out)
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn known_vector() {
        // sha256 of the empty string
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn file_digest_matches_byte_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        fs::write(&path, b"stage one\n").unwrap();
        assert_eq!(sha256_file(&path).unwrap(), sha256_hex(b"stage one\n"));
    }

    #[test]
    fn tree_digest_uses_relative_slash_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("a/b")).unwrap();
        fs::write(dir.path().join("a/b/c.txt"), "x").unwrap();
        fs::write(dir.path().join("top.txt"), "y").unwrap();
        let tree = digest_tree(dir.path()).unwrap();
        let keys: Vec<_> = tree.keys().cloned().collect();
        assert_eq!(keys, vec!["a/b/c.txt".to_string(), "top.txt".to_string()]);
    }

    #[test]
    fn missing_root_is_empty_tree() {
        let dir = tempfile::tempdir().unwrap();
        let tree = digest_tree(&dir.path().join("nope")).unwrap();
        assert!(tree.is_empty());
    }
}
