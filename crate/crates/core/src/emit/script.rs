use thiserror::Error;

use super::ir::ArchitectureIR;

const TEMPLATE: &str = include_str!("train_template.py");

const SUPPORTED: &[&str] = &[
    "input",
    "zeros",
    "identity",
    "void",
    "dense",
    "convolution",
    "pooling",
    "flatten",
    "padding",
    "activation",
    "dropout",
    "batchnorm",
    "sum",
    "concat",
    "product",
    "classifier",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_size: u32,
    pub dataset: String,
    pub subset: Option<u64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 12, batch_size: 128, dataset: "mnist".into(), subset: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("node {id}: kind `{kind}` has no trainer mapping")]
    UnsupportedKind { id: usize, kind: String },
}

fn py_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Self-contained Python/Keras training script with the IR embedded. The
/// script also accepts `--ir` to train another IR with the same settings.
pub fn emit_training_script(ir: &ArchitectureIR, arch_id: &str, t: &TrainConfig) -> Result<String, ScriptError> {
    if let Some(n) = ir.nodes.iter().find(|n| !SUPPORTED.contains(&n.kind.as_str())) {
        return Err(ScriptError::UnsupportedKind { id: n.id, kind: n.kind.clone() });
    }
    let subset = t.subset.map_or_else(|| "None".to_string(), |k| k.to_string());
    Ok(TEMPLATE
        .replace("__IR_TEXT__", &py_str(&ir.to_json()))
        .replace("__ARCH_ID__", &py_str(arch_id))
        .replace("__EXPECTED_PARAMS__", &ir.total_size.to_string())
        .replace("__BATCH_SIZE__", &t.batch_size.to_string())
        .replace("__EPOCHS__", &t.epochs.to_string())
        .replace("__DATASET__", &py_str(&t.dataset))
        .replace("__SEED__", &t.seed.to_string())
        .replace("__SUBSET__", &subset))
}
