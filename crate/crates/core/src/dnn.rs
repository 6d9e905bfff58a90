//! The block/cell feature model of feedforward architectures, generated for
//! given block and cell bounds.

use std::fmt::Write;

use crate::fm::{parse_fm, FeatureModel, ParseError};

/// Attribute domains and instance bounds of the generated model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnnSpace {
    pub max_blocks: u32,
    pub max_cells: u32,
    pub conv_kernels: Vec<u32>,
    pub conv_filters: Vec<u32>,
    pub strides: Vec<u32>,
    pub pool_kernels: Vec<u32>,
    pub dense_neurons: Vec<u32>,
    pub padding_amounts: Vec<u32>,
    pub dropout_rates: Vec<String>,
}

const ACTIVATIONS: &str = "relu, sigmoid, tanh, linear";

impl Default for DnnSpace {
    fn default() -> Self {
        DnnSpace {
            max_blocks: 5,
            max_cells: 5,
            conv_kernels: vec![1, 3, 5],
            conv_filters: vec![6, 16, 32, 64, 120, 128],
            strides: vec![1, 2, 3],
            pool_kernels: vec![2, 3, 5],
            dense_neurons: vec![16, 64, 84, 256, 512],
            padding_amounts: vec![1, 2],
            dropout_rates: vec!["0.1".into(), "0.3".into(), "0.5".into()],
        }
    }
}

impl DnnSpace {
    pub fn with_bounds(max_blocks: u32, max_cells: u32) -> Self {
        DnnSpace { max_blocks, max_cells, ..Self::default() }
    }

    /// Space wide enough for the LeNet5 and Inception-module fixtures.
    pub fn fixtures() -> Self {
        DnnSpace::with_bounds(5, 9)
    }
}

fn list(values: &[u32]) -> String {
    values.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
}

fn input_layers(s: &DnnSpace, pad: &str, zeros: bool) -> String {
    let mut out = String::new();
    if zeros {
        let _ = writeln!(out, "{pad}Zeros {{ }}");
    }
    let _ = writeln!(out, "{pad}Identity {{ }}");
    let _ = writeln!(out, "{pad}Dense {{");
    let _ = writeln!(out, "{pad}  attr neuron_number in {{{}}};", list(&s.dense_neurons));
    let _ = writeln!(out, "{pad}  attr activation in {{{ACTIVATIONS}}};");
    let _ = writeln!(out, "{pad}}}");
    let _ = writeln!(out, "{pad}Convolution {{");
    let _ = writeln!(out, "{pad}  attr kernel in {{{}}};", list(&s.conv_kernels));
    let _ = writeln!(out, "{pad}  attr filters_number in {{{}}};", list(&s.conv_filters));
    let _ = writeln!(out, "{pad}  attr stride in {{{}}};", list(&s.strides));
    let _ = writeln!(out, "{pad}  attr padding in {{same, valid}};");
    let _ = writeln!(out, "{pad}  attr activation in {{{ACTIVATIONS}}};");
    let _ = writeln!(out, "{pad}}}");
    let _ = writeln!(out, "{pad}Pooling {{");
    let _ = writeln!(out, "{pad}  attr kernel in {{{}}};", list(&s.pool_kernels));
    let _ = writeln!(out, "{pad}  attr type in {{max, average}};");
    let _ = writeln!(out, "{pad}  attr stride in {{{}}};", list(&s.strides));
    let _ = writeln!(out, "{pad}  attr padding in {{same, valid}};");
    let _ = writeln!(out, "{pad}}}");
    out
}

fn operations(s: &DnnSpace, pad: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{pad}Void {{ }}");
    let _ = writeln!(out, "{pad}Flatten {{ }}");
    let _ = writeln!(out, "{pad}Padding {{ attr amount in {{{}}}; }}", list(&s.padding_amounts));
    let _ = writeln!(out, "{pad}Activation {{ attr function in {{relu, sigmoid, tanh}}; }}");
    let _ = writeln!(out, "{pad}Dropout {{ attr rate in {{{}}}; }}", s.dropout_rates.join(", "));
    let _ = writeln!(out, "{pad}BatchNormalization {{ }}");
    out
}

/// DSL text of the model.
pub fn dnn_model_text(s: &DnnSpace) -> String {
    let b = s.max_blocks;
    let c = s.max_cells;
    let relative: Vec<u32> = (0..c.saturating_sub(1).max(1)).collect();
    let p = "          ";
    let mut out = String::new();
    out.push_str("root Architecture {\n  mandatory Input { }\n  mandatory Output { }\n");
    let _ = writeln!(out, "  mandatory Block [1..{b}] {{");
    let _ = writeln!(out, "    mandatory Cell [1..{c}] {{");
    for (name, zeros) in [("Input1", false), ("Input2", true)] {
        let _ = writeln!(out, "      mandatory {name} {{\n        alternative {{");
        out.push_str(&input_layers(s, p, zeros));
        out.push_str("        }\n      }\n");
    }
    for name in ["Operation1", "Operation2"] {
        let _ = writeln!(out, "      mandatory {name} {{\n        alternative {{");
        out.push_str(&operations(s, p));
        out.push_str("        }\n      }\n");
    }
    out.push_str("      mandatory Combination { alternative { Sum { } Concat { } Product { } } }\n");
    out.push_str("      mandatory Output {\n        alternative {\n");
    let _ = writeln!(out, "{p}CellOutput {{ attr relativeIndex in {{{}}}; }}", list(&relative));
    let _ = writeln!(out, "{p}BlockOutput {{ }}\n{p}OutOutput {{ }}");
    out.push_str("        }\n      }\n    }\n  }\n}\n");

    out.push_str("constraints {\n  some(OutOutput);\n");
    for bi in 1..=b {
        if bi < b {
            let _ = writeln!(out, "  Block#{bi}/Cell/Output/BlockOutput -> Block#{};", bi + 1);
            let _ = writeln!(out, "  Block#{} -> some(Block#{bi}/Cell/Output/BlockOutput);", bi + 1);
        } else {
            let _ = writeln!(out, "  !Block#{bi}/Cell/Output/BlockOutput;");
        }
    }
    for ci in 1..=c {
        for &r in &relative {
            let target = ci + r + 1;
            if target <= c {
                let _ = writeln!(out, "  Cell#{ci}/Output/CellOutput(relativeIndex={r}) -> Cell#{target};");
            } else {
                let _ = writeln!(out, "  !Cell#{ci}/Output/CellOutput(relativeIndex={r});");
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn dnn_model(s: &DnnSpace) -> Result<FeatureModel, ParseError> {
    parse_fm(&dnn_model_text(s))
}

/// Name of the profile reproducing the restricted experimental setup.
pub const RESTRICTED_PROFILE: &str = "restricted";

/// Extra constraints of a named profile.
pub fn profile_overlay(name: &str) -> Option<&'static str> {
    match name {
        RESTRICTED_PROFILE => Some("!BatchNormalization;\n!Padding;\n!Concat;\n!Product;\none(OutOutput);\n"),
        _ => None,
    }
}
