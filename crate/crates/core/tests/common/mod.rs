#![allow(dead_code)]

pub mod tiny;

use std::path::PathBuf;

use featnet::arch::{compile, ArchitectureGraph, DatasetSpec};
use featnet::fm::Configuration;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.fncfg"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture(name: &str) -> Configuration {
    Configuration::parse_fncfg(&fixture_text(name)).unwrap()
}

pub fn compiled(name: &str, dataset: &DatasetSpec) -> ArchitectureGraph {
    compile(&fixture(name), dataset).unwrap()
}

/// `python3` if it can be started.
pub fn python() -> Option<&'static str> {
    std::process::Command::new("python3").arg("--version").output().ok().filter(|o| o.status.success()).map(|_| "python3")
}
