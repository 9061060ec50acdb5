//! Shared fixtures for the pipeline benchmarks.

use std::path::{Path, PathBuf};

use scomma_core::pipeline::load_sources;
use scomma_core::Source;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// The model and data sources of `corpus/<dir>/<name>.scm`.
pub fn sources(dir: &str, name: &str) -> (Source, Vec<Source>) {
    let path = corpus_dir().join(dir).join(format!("{name}.scm"));
    load_sources(&path, None).unwrap_or_else(|d| panic!("{d}"))
}

/// Benchmarks exercised by every group.
pub const CASES: &[(&str, &str)] = &[
    ("send", "Send"),
    ("stable", "StableMarriage"),
    ("queens-18", "Queens"),
    ("sudoku", "Sudoku"),
    ("packing", "Packing"),
];
