use std::fmt::{self, Write};

use super::model::{FeatureId, FeatureModel, GroupKind};

impl FeatureModel {
    fn write_body(&self, id: FeatureId, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth + 1);
        let f = self.feature(id);
        for a in &f.attributes {
            let values: Vec<String> = a.domain.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{pad}attr {} in {{{}}};", a.name, values.join(", "));
        }
        match f.group {
            GroupKind::And => {
                for &c in &f.children {
                    let child = self.feature(c);
                    let card = child.cardinality;
                    let keyword = if card.min == 0 { "optional" } else { "mandatory" };
                    let _ = write!(out, "{pad}{keyword} {}", child.name);
                    if card.is_multi() {
                        let _ = write!(out, " {card}");
                    }
                    self.write_block(c, depth, out);
                }
            }
            GroupKind::Or | GroupKind::Alternative => {
                let _ = writeln!(out, "{pad}{} {{", f.group);
                for &c in &f.children {
                    let _ = write!(out, "{pad}  {}", self.feature(c).name);
                    self.write_block(c, depth + 1, out);
                }
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }

    fn write_block(&self, id: FeatureId, depth: usize, out: &mut String) {
        let f = self.feature(id);
        if f.attributes.is_empty() && f.children.is_empty() {
            out.push_str(" { }\n");
            return;
        }
        out.push_str(" {\n");
        self.write_body(id, depth + 1, out);
        let _ = writeln!(out, "{}}}", "  ".repeat(depth + 1));
    }
}

impl fmt::Display for FeatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = write!(out, "root {}", self.root().name);
        let root = self.root();
        if root.attributes.is_empty() && root.children.is_empty() {
            out.push_str(" { }\n");
        } else {
            out.push_str(" {\n");
            self.write_body(FeatureId::ROOT, 0, &mut out);
            out.push_str("}\n");
        }
        if !self.constraints.is_empty() {
            out.push_str("constraints {\n");
            for c in &self.constraints {
                let _ = writeln!(out, "  {c};");
            }
            out.push_str("}\n");
        }
        f.write_str(&out)
    }
}
