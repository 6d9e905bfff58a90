//! Architecture graphs: layers, shape inference, parameter counting, and
//! compilation of block/cell configurations.

mod compile;
mod graph;
mod layer;

pub use compile::{compile, PendingEntry, PendingOutputs, BLOCK, CELL};
pub use graph::{
    validate_graph, ArchitectureGraph, CompileError, CompileErrorKind, DatasetSpec, Element, Node, Site,
};
pub use layer::{count_params, infer_shape, Activation, Layer, Padding, PoolType, ShapeError, ShapeErrorKind, TensorShape};
