use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arch::CompileErrorKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ArchStatus {
    Compiled,
    CompileError { kind: CompileErrorKind, message: String },
    Trained { metrics: String, accuracy: Option<f64> },
    Failed { diagnostics: String },
}

/// Bookkeeping for one output directory. Commands that write into the same
/// directory extend the same manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub model: Option<String>,
    pub bounds: Option<(u32, u32)>,
    pub profile: Option<String>,
    pub sample_size: Option<usize>,
    pub seeds: BTreeMap<String, u64>,
    pub dataset: Option<String>,
    pub statuses: BTreeMap<String, ArchStatus>,
    /// Wall-clock seconds per command.
    pub timing: BTreeMap<String, f64>,
}

pub const RUN_MANIFEST: &str = "run_manifest.json";

impl RunManifest {
    pub fn load_or_default(dir: &Path) -> Self {
        std::fs::read_to_string(dir.join(RUN_MANIFEST))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    pub fn count(&self, pred: impl Fn(&ArchStatus) -> bool) -> usize {
        self.statuses.values().filter(|s| pred(s)).count()
    }
}
