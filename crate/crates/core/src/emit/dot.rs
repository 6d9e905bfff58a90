use std::collections::BTreeMap;
use std::fmt::Write;

use crate::arch::ArchitectureGraph;

/// Graphviz rendering: one box per node labeled with kind and output shape,
/// nodes of the same block grouped in a cluster.
pub fn emit_dot(g: &ArchitectureGraph) -> String {
    let mut out = String::new();
    out.push_str("digraph architecture {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n");
    let label = |i: usize| {
        let n = &g.nodes[i];
        format!("  n{i} [label=\"{}\\n{}\"];\n", n.layer.kind(), n.out_shape)
    };
    let mut blocks: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for n in &g.nodes {
        match n.site {
            Some(s) => blocks.entry(s.block).or_default().push(n.id),
            None => out.push_str(&label(n.id)),
        }
    }
    for (b, ids) in blocks {
        let _ = writeln!(out, "  subgraph cluster_block{b} {{\n    label=\"Block {b}\";");
        for i in ids {
            out.push_str("  ");
            out.push_str(&label(i));
        }
        out.push_str("  }\n");
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}
