//! Generators and independent reference implementations shared by the
//! integration and acceptance tests.
#![allow(dead_code)]

pub mod checks;
pub mod gen;

use std::path::PathBuf;

/// Both crates live at `<root>/crates/<name>`.
pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root exists")
}

pub fn corpus_dir() -> PathBuf {
    workspace_root().join("crates/core/tests/corpus")
}

pub fn demo_dir() -> PathBuf {
    workspace_root().join("data")
}
