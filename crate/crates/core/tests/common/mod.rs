#![allow(dead_code)]

pub mod gen;
pub mod laws;
pub mod oracle;
pub mod uppaal;

use std::path::PathBuf;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_file(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("corpus/{name}: {e}"))
}
