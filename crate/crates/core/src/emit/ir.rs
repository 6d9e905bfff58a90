use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arch::{
    validate_graph, Activation, ArchitectureGraph, CompileError, DatasetSpec, Layer, Node, Padding, PoolType, Site,
    TensorShape,
};

pub const SCHEMA_VERSION: &str = "featnet-ir/1";

/// Where an IR came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrProvenance {
    /// Hex SHA-256 of the configuration text the graph was compiled from.
    pub config_sha256: Option<String>,
    pub seeds: BTreeMap<String, u64>,
}

impl IrProvenance {
    pub fn from_config_text(text: &str) -> Self {
        IrProvenance { config_sha256: Some(sha256_hex(text.as_bytes())), seeds: BTreeMap::new() }
    }

    pub fn with_seed(mut self, name: &str, seed: u64) -> Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrNode {
    pub id: usize,
    pub kind: String,
    pub attributes: BTreeMap<String, Json>,
    pub inputs: Vec<usize>,
    pub in_shapes: Vec<TensorShape>,
    pub out_shape: TensorShape,
    pub params: u64,
    pub site: Option<Site>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureIR {
    pub schema_version: String,
    pub dataset: DatasetSpec,
    pub nodes: Vec<IrNode>,
    pub edges: Vec<(usize, usize)>,
    pub input: usize,
    pub classifier: usize,
    pub total_size: u64,
    pub provenance: IrProvenance,
}

#[derive(Debug, Error)]
pub enum IrError {
    #[error("invalid IR JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version `{0}`")]
    Schema(String),
    #[error("node {id}: {message}")]
    Node { id: usize, message: String },
    #[error("edge list does not match node inputs")]
    Edges,
    #[error("IR graph is inconsistent: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<CompileError>),
}

pub fn layer_attributes(layer: &Layer) -> BTreeMap<String, Json> {
    let v = match layer {
        Layer::Dense { neurons, activation } => json!({"neurons": neurons, "activation": activation.as_str()}),
        Layer::Convolution { kernel, filters, stride, padding, activation } => json!({
            "kernel": kernel,
            "filters": filters,
            "stride": stride,
            "padding": padding.as_str(),
            "activation": activation.as_str(),
        }),
        Layer::Pooling { kernel, stride, padding, pool } => json!({
            "kernel": kernel,
            "stride": stride,
            "padding": padding.as_str(),
            "pool": pool.as_str(),
        }),
        Layer::Padding { amount } => json!({"amount": amount}),
        Layer::Activation { function } => json!({"function": function.as_str()}),
        Layer::Dropout { rate } => json!({"rate": rate}),
        Layer::Classifier { classes } => json!({"classes": classes, "activation": "softmax"}),
        _ => json!({}),
    };
    match v {
        Json::Object(m) => m.into_iter().collect(),
        _ => unreachable!(),
    }
}

fn layer_from(id: usize, kind: &str, attrs: &BTreeMap<String, Json>) -> Result<Layer, IrError> {
    let bad = |message: String| IrError::Node { id, message };
    let int = |k: &str| attrs.get(k).and_then(Json::as_u64).ok_or_else(|| bad(format!("missing integer `{k}`")));
    let token = |k: &str| attrs.get(k).and_then(Json::as_str).ok_or_else(|| bad(format!("missing string `{k}`")));
    fn parsed<T>(id: usize, k: &str, v: Option<T>) -> Result<T, IrError> {
        v.ok_or_else(|| IrError::Node { id, message: format!("unsupported `{k}`") })
    }
    let act = |k: &str| token(k).and_then(|t| parsed(id, k, Activation::from_token(t)));
    let pad = || token("padding").and_then(|t| parsed(id, "padding", Padding::from_token(t)));
    Ok(match kind {
        "input" => Layer::Input,
        "zeros" => Layer::Zeros,
        "identity" => Layer::Identity,
        "void" => Layer::Void,
        "flatten" => Layer::Flatten,
        "batchnorm" => Layer::BatchNorm,
        "sum" => Layer::Sum,
        "concat" => Layer::Concat,
        "product" => Layer::Product,
        "dense" => Layer::Dense { neurons: int("neurons")?, activation: act("activation")? },
        "convolution" => Layer::Convolution {
            kernel: int("kernel")?,
            filters: int("filters")?,
            stride: int("stride")?,
            padding: pad()?,
            activation: act("activation")?,
        },
        "pooling" => Layer::Pooling {
            kernel: int("kernel")?,
            stride: int("stride")?,
            padding: pad()?,
            pool: token("pool").and_then(|t| parsed(id, "pool", PoolType::from_token(t)))?,
        },
        "padding" => Layer::Padding { amount: int("amount")? },
        "activation" => Layer::Activation { function: act("function")? },
        "dropout" => Layer::Dropout {
            rate: attrs.get("rate").and_then(Json::as_f64).ok_or_else(|| bad("missing number `rate`".into()))?,
        },
        "classifier" => Layer::Classifier { classes: int("classes")? },
        other => return Err(bad(format!("unknown kind `{other}`"))),
    })
}

impl ArchitectureIR {
    pub fn from_graph(g: &ArchitectureGraph, provenance: IrProvenance) -> Self {
        ArchitectureIR {
            schema_version: SCHEMA_VERSION.to_string(),
            dataset: g.dataset.clone(),
            nodes: g
                .nodes
                .iter()
                .map(|n| IrNode {
                    id: n.id,
                    kind: n.layer.kind().to_string(),
                    attributes: layer_attributes(&n.layer),
                    inputs: n.inputs.clone(),
                    in_shapes: n.in_shapes.clone(),
                    out_shape: n.out_shape.clone(),
                    params: n.params,
                    site: n.site,
                })
                .collect(),
            edges: g.edges(),
            input: g.input,
            classifier: g.classifier,
            total_size: g.total_size,
            provenance,
        }
    }

    /// Canonical text: keys sorted, two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("IR is always serializable");
        let mut s = serde_json::to_string_pretty(&value).expect("JSON value is always serializable");
        s.push('\n');
        s
    }

    /// Rebuilds the graph and re-validates it.
    pub fn to_graph(&self) -> Result<ArchitectureGraph, IrError> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(Node {
                    id: n.id,
                    layer: layer_from(n.id, &n.kind, &n.attributes)?,
                    inputs: n.inputs.clone(),
                    in_shapes: n.in_shapes.clone(),
                    out_shape: n.out_shape.clone(),
                    params: n.params,
                    site: n.site,
                })
            })
            .collect::<Result<Vec<_>, IrError>>()?;
        let g = ArchitectureGraph {
            dataset: self.dataset.clone(),
            nodes,
            input: self.input,
            classifier: self.classifier,
            total_size: self.total_size,
        };
        let problems = validate_graph(&g);
        if !problems.is_empty() {
            return Err(IrError::Invalid(problems));
        }
        if g.edges() != self.edges {
            return Err(IrError::Edges);
        }
        Ok(g)
    }
}

pub fn emit_ir(g: &ArchitectureGraph, provenance: &IrProvenance) -> String {
    ArchitectureIR::from_graph(g, provenance.clone()).to_json()
}

pub fn parse_ir(text: &str) -> Result<ArchitectureIR, IrError> {
    let raw: Json = serde_json::from_str(text)?;
    match raw.get("schema_version").and_then(Json::as_str) {
        Some(SCHEMA_VERSION) => {}
        other => return Err(IrError::Schema(other.unwrap_or("").to_string())),
    }
    Ok(serde_json::from_value(raw)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attributes_roundtrip_through_kind() {
        let layers = [
            Layer::Dense { neurons: 84, activation: Activation::Tanh },
            Layer::Convolution {
                kernel: 3,
                filters: 8,
                stride: 2,
                padding: Padding::Same,
                activation: Activation::Linear,
            },
            Layer::Pooling { kernel: 2, stride: 2, padding: Padding::Valid, pool: PoolType::Average },
            Layer::Padding { amount: 2 },
            Layer::Activation { function: Activation::Sigmoid },
            Layer::Dropout { rate: 0.3 },
            Layer::Classifier { classes: 10 },
            Layer::BatchNorm,
            Layer::Product,
        ];
        for l in layers {
            assert_eq!(layer_from(0, l.kind(), &layer_attributes(&l)).unwrap(), l);
        }
        assert!(layer_from(0, "lstm", &BTreeMap::new()).is_err());
    }

    #[test]
    fn schema_is_checked() {
        let e = parse_ir(r#"{"schema_version": "other/2"}"#).unwrap_err();
        assert!(matches!(e, IrError::Schema(s) if s == "other/2"));
    }
}
