//! Execution harness for hierarchical skill graphs.
//!
//! The crate is organized around the run lifecycle:
//!
//! - [`skill`] — declarative skill manifests and their dependency DAG
//!   (loading, validation, execution closures, topological plans).
//! - [`agent`] — model backends for planning and judging, including a
//!   deterministic scripted replay backend.
//! - [`harness`] — the four-phase run protocol (decompose, initialize,
//!   execute, verify) with per-stage checkpoints, resumable snapshots,
//!   and an append-only audit log.
//! - [`verify`] — post-execution workspace verification: expected
//!   artifacts, NaN/Inf screening, checksum validation, QC rules.
//! - [`bench`] — task specifications and the with/no-skills run matrix
//!   with repetition alignment.
//! - [`scoring`] — weighted quality scores, normalized gains, and the
//!   lexicographic leaderboard.
//!
//! Supporting modules: [`record`] (the JSONL record encoding shared by
//! every machine-readable artifact), [`digest`] (SHA-256 content
//! digests), [`pathglob`] (workspace-relative glob matching), and
//! [`timeutil`] (millisecond-precision UTC timestamps).

pub mod agent;
pub mod bench;
pub mod digest;
pub mod harness;
pub mod pathglob;
pub mod record;
pub mod scoring;
pub mod skill;
pub mod timeutil;
pub mod verify;

pub use timeutil::Timestamp;
