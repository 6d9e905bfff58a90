use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::layer::{count_params, infer_shape, Layer, ShapeErrorKind, TensorShape};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub input: TensorShape,
    pub classes: u64,
}

impl DatasetSpec {
    pub fn mnist() -> Self {
        DatasetSpec { name: "mnist".into(), input: TensorShape::new([28, 28, 1]), classes: 10 }
    }

    pub fn cifar10() -> Self {
        DatasetSpec { name: "cifar10".into(), input: TensorShape::new([32, 32, 3]), classes: 10 }
    }

    pub fn custom(name: impl Into<String>, input: TensorShape, classes: u64) -> Self {
        DatasetSpec { name: name.into(), input, classes }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "mnist" => Some(Self::mnist()),
            "cifar10" => Some(Self::cifar10()),
            _ => None,
        }
    }
}

/// Element of a cell a node was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    Input1,
    Input2,
    Operation1,
    Operation2,
    Combination,
}

impl Element {
    pub fn as_str(self) -> &'static str {
        match self {
            Element::Input1 => "input1",
            Element::Input2 => "input2",
            Element::Operation1 => "operation1",
            Element::Operation2 => "operation2",
            Element::Combination => "combination",
        }
    }
}

/// Position of a node inside the block/cell structure (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub block: u32,
    pub cell: u32,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub layer: Layer,
    /// Producer node ids, in operand order.
    pub inputs: Vec<usize>,
    pub in_shapes: Vec<TensorShape>,
    pub out_shape: TensorShape,
    pub params: u64,
    /// `None` for the network input and the classifier head.
    pub site: Option<Site>,
}

/// A compiled architecture. Nodes are stored in topological order and
/// `nodes[i].id == i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureGraph {
    pub dataset: DatasetSpec,
    pub nodes: Vec<Node>,
    pub input: usize,
    pub classifier: usize,
    pub total_size: u64,
}

impl ArchitectureGraph {
    /// `(producer, consumer)` pairs in consumer order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes.iter().flat_map(|n| n.inputs.iter().map(move |&i| (i, n.id))).collect()
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.nodes.iter().filter(|n| n.layer.kind() == kind).count()
    }

    /// Sum of per-node parameter counts.
    pub fn recomputed_size(&self) -> u64 {
        self.nodes.iter().map(|n| n.params).sum()
    }

    /// Node kinds along the unique path from input to classifier, if the
    /// graph is a single chain.
    pub fn chain(&self) -> Option<Vec<&'static str>> {
        let mut out_degree = vec![0usize; self.nodes.len()];
        for (a, _) in self.edges() {
            out_degree[a] += 1;
        }
        let linear = self.nodes.iter().all(|n| n.inputs.len() <= 1)
            && out_degree.iter().enumerate().all(|(i, &d)| d == 1 || (i == self.classifier && d == 0));
        if !linear {
            return None;
        }
        let mut kinds = Vec::new();
        let mut cur = self.classifier;
        loop {
            kinds.push(self.nodes[cur].layer.kind());
            match self.nodes[cur].inputs.first() {
                Some(&p) => cur = p,
                None => break,
            }
        }
        kinds.reverse();
        (cur == self.input).then_some(kinds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CompileErrorKind {
    MissingPredecessorBlock,
    BlockOutputWithoutNextBlock,
    RelativeIndexOverrun,
    FanInExceeded,
    KernelTooLarge,
    FlattenOn1D,
    IncompatibleCombination,
    DanglingPendingOutput,
    RankMismatch,
    BlockWithoutInput,
    NoNetworkOutput,
    MalformedConfiguration,
    Cycle,
    Unreachable,
    ShapeInconsistency,
    ParamInconsistency,
    TotalSizeMismatch,
}

impl CompileErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CompileErrorKind::MissingPredecessorBlock => "missingPredecessorBlock",
            CompileErrorKind::BlockOutputWithoutNextBlock => "blockOutputWithoutNextBlock",
            CompileErrorKind::RelativeIndexOverrun => "relativeIndexOverrun",
            CompileErrorKind::FanInExceeded => "fanInExceeded",
            CompileErrorKind::KernelTooLarge => "kernelTooLarge",
            CompileErrorKind::FlattenOn1D => "flattenOn1D",
            CompileErrorKind::IncompatibleCombination => "incompatibleCombination",
            CompileErrorKind::DanglingPendingOutput => "danglingPendingOutput",
            CompileErrorKind::RankMismatch => "rankMismatch",
            CompileErrorKind::BlockWithoutInput => "blockWithoutInput",
            CompileErrorKind::NoNetworkOutput => "noNetworkOutput",
            CompileErrorKind::MalformedConfiguration => "malformedConfiguration",
            CompileErrorKind::Cycle => "cycle",
            CompileErrorKind::Unreachable => "unreachable",
            CompileErrorKind::ShapeInconsistency => "shapeInconsistency",
            CompileErrorKind::ParamInconsistency => "paramInconsistency",
            CompileErrorKind::TotalSizeMismatch => "totalSizeMismatch",
        }
    }
}

impl fmt::Display for CompileErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<ShapeErrorKind> for CompileErrorKind {
    fn from(k: ShapeErrorKind) -> Self {
        match k {
            ShapeErrorKind::KernelTooLarge => CompileErrorKind::KernelTooLarge,
            ShapeErrorKind::FlattenOn1D => CompileErrorKind::FlattenOn1D,
            ShapeErrorKind::IncompatibleCombination => CompileErrorKind::IncompatibleCombination,
            ShapeErrorKind::RankMismatch => CompileErrorKind::RankMismatch,
            ShapeErrorKind::Arity => CompileErrorKind::ShapeInconsistency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {message}")]
pub struct CompileError {
    pub kind: CompileErrorKind,
    pub message: String,
}

impl CompileError {
    pub fn new(kind: CompileErrorKind, message: impl Into<String>) -> Self {
        CompileError { kind, message: message.into() }
    }
}

/// Independent structural re-check of a graph: ids, acyclicity, reachability,
/// operand counts, shapes, and parameter counts.
pub fn validate_graph(g: &ArchitectureGraph) -> Vec<CompileError> {
    use CompileErrorKind as K;
    let mut out = Vec::new();
    let n = g.nodes.len();
    for (i, node) in g.nodes.iter().enumerate() {
        if node.id != i {
            out.push(CompileError::new(K::ShapeInconsistency, format!("node at position {i} has id {}", node.id)));
        }
        if let Some(&bad) = node.inputs.iter().find(|&&p| p >= n) {
            out.push(CompileError::new(K::Unreachable, format!("node {i} reads missing node {bad}")));
        }
    }
    if g.input >= n || g.classifier >= n {
        out.push(CompileError::new(K::Unreachable, "input or classifier id out of range"));
    }
    if !out.is_empty() {
        return out;
    }

    // Kahn's algorithm over producer -> consumer edges.
    let mut indegree: Vec<usize> = g.nodes.iter().map(|x| x.inputs.len()).collect();
    let mut consumers = vec![Vec::new(); n];
    for (a, b) in g.edges() {
        consumers[a].push(b);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(v) = queue.pop_front() {
        visited += 1;
        for &c in &consumers[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if visited != n {
        out.push(CompileError::new(K::Cycle, format!("{} node(s) lie on a cycle", n - visited)));
        return out;
    }

    let mut reached = vec![false; n];
    reached[g.input] = true;
    let mut stack = vec![g.input];
    while let Some(v) = stack.pop() {
        for &c in &consumers[v] {
            if !reached[c] {
                reached[c] = true;
                stack.push(c);
            }
        }
    }
    let mut feeds = vec![false; n];
    feeds[g.classifier] = true;
    let mut stack = vec![g.classifier];
    while let Some(v) = stack.pop() {
        for &p in &g.nodes[v].inputs {
            if !feeds[p] {
                feeds[p] = true;
                stack.push(p);
            }
        }
    }
    for i in 0..n {
        if !reached[i] {
            out.push(CompileError::new(K::Unreachable, format!("node {i} is not reachable from the input")));
        } else if !feeds[i] {
            out.push(CompileError::new(K::Unreachable, format!("node {i} does not lead to the classifier")));
        }
    }

    for node in &g.nodes {
        let id = node.id;
        if node.inputs.len() > 2 {
            out.push(CompileError::new(K::FanInExceeded, format!("node {id} has {} inputs", node.inputs.len())));
        }
        if node.layer.is_combination() && node.inputs.len() != 2 {
            out.push(CompileError::new(
                K::IncompatibleCombination,
                format!("combination node {id} has {} operands", node.inputs.len()),
            ));
            continue;
        }
        if node.layer == Layer::Input {
            if !node.inputs.is_empty() || node.out_shape != g.dataset.input {
                out.push(CompileError::new(K::ShapeInconsistency, format!("input node {id} is inconsistent")));
            }
            continue;
        }
        let actual: Vec<TensorShape> = node.inputs.iter().map(|&p| g.nodes[p].out_shape.clone()).collect();
        if actual != node.in_shapes {
            out.push(CompileError::new(
                K::ShapeInconsistency,
                format!("node {id} records input shapes that differ from its producers"),
            ));
        }
        match infer_shape(&node.layer, &actual) {
            Ok(s) if s == node.out_shape => {}
            Ok(s) => out.push(CompileError::new(
                K::ShapeInconsistency,
                format!("node {id} records {} but infers {s}", node.out_shape),
            )),
            Err(e) => out.push(CompileError::new(e.kind.into(), format!("node {id}: {}", e.message))),
        }
        if count_params(&node.layer, &actual) != node.params {
            out.push(CompileError::new(K::ParamInconsistency, format!("node {id} has a wrong parameter count")));
        }
    }
    if g.nodes[g.classifier].layer != (Layer::Classifier { classes: g.dataset.classes }) {
        out.push(CompileError::new(K::ShapeInconsistency, "classifier does not match the dataset classes"));
    }
    if g.recomputed_size() != g.total_size {
        out.push(CompileError::new(
            K::TotalSizeMismatch,
            format!("total size {} differs from the node sum {}", g.total_size, g.recomputed_size()),
        ));
    }
    out
}
