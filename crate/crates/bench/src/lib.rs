//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use dyncu::{Budget, ModelSpec};

pub fn shipped(name: &str) -> ModelSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    let text = std::fs::read_to_string(path).expect("model file");
    ModelSpec::parse(&text, Budget::default()).expect("model parses")
}
