//! Serialized forms of a compiled architecture: canonical JSON IR, Graphviz
//! DOT, and a Keras training script.

mod dot;
mod ir;
mod script;

pub use dot::emit_dot;
pub use ir::{emit_ir, layer_attributes, parse_ir, sha256_hex, ArchitectureIR, IrError, IrNode, IrProvenance, SCHEMA_VERSION};
pub use script::{emit_training_script, ScriptError, TrainConfig};
