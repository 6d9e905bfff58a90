//! Random small feature models and a brute-force view of their instances.

use std::collections::{BTreeMap, BTreeSet};

use featnet::fm::{AttrKey, Configuration, FeatureId, FeatureModel, InstancePath, Segment, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gen {
    rng: ChaCha8Rng,
    next: u32,
    multi_left: u32,
    names: Vec<String>,
    attributed: Vec<String>,
}

impl Gen {
    fn fresh(&mut self) -> String {
        self.next += 1;
        let name = format!("F{}", self.next);
        self.names.push(name.clone());
        name
    }

    fn attrs(&mut self, name: &str, pad: &str) -> String {
        if self.rng.random_bool(0.25) {
            self.attributed.push(name.to_string());
            format!("{pad}  attr k in {{1, 2}};\n")
        } else {
            String::new()
        }
    }

    fn children(&mut self, depth: usize, pad: &str) -> String {
        let count = if depth == 0 { self.rng.random_range(1..=3) } else { self.rng.random_range(0..=2) };
        if count == 0 {
            return String::new();
        }
        let inner = format!("{pad}  ");
        let mut out = String::new();
        if count >= 2 && self.rng.random_bool(0.4) {
            let kw = if self.rng.random_bool(0.5) { "or" } else { "alternative" };
            out.push_str(&format!("{pad}{kw} {{\n"));
            for _ in 0..count {
                let name = self.fresh();
                out.push_str(&format!("{inner}{name} {{\n"));
                out.push_str(&self.attrs(&name, &inner));
                out.push_str(&format!("{inner}}}\n"));
            }
            out.push_str(&format!("{pad}}}\n"));
            return out;
        }
        for _ in 0..count {
            let name = self.fresh();
            let card = match self.rng.random_range(0..4) {
                0 => "mandatory ".to_string(),
                1 | 2 => "optional ".to_string(),
                _ if self.multi_left > 0 => {
                    self.multi_left -= 1;
                    let min = self.rng.random_range(0..=1);
                    format!("[{min}..2] ")
                }
                _ => "optional ".to_string(),
            };
            let (prefix, suffix) = if card.starts_with('[') { (String::new(), card) } else { (card, String::new()) };
            out.push_str(&format!("{pad}{prefix}{name} {suffix}{{\n"));
            out.push_str(&self.attrs(&name, pad));
            if depth < 2 {
                out.push_str(&self.children(depth + 1, &inner));
            }
            out.push_str(&format!("{pad}}}\n"));
        }
        out
    }

    fn pick(&mut self) -> String {
        let i = self.rng.random_range(0..self.names.len());
        self.names[i].clone()
    }

    fn constraint(&mut self) -> String {
        let a = self.pick();
        let b = self.pick();
        match self.rng.random_range(0..5) {
            0 => format!("{a} requires {b};"),
            1 => format!("{a} excludes {b};"),
            2 if !self.attributed.is_empty() => {
                let i = self.rng.random_range(0..self.attributed.len());
                let v = self.rng.random_range(1..=2);
                format!("{a} requires {}(k={v});", self.attributed[i])
            }
            3 => format!("!{a} | some({b});"),
            _ => format!("lone({a}) -> !{b};"),
        }
    }
}

/// DSL text of a random model with at most 3 levels and one multi-feature.
pub fn tiny_model_text(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next: 0,
        multi_left: 1,
        names: Vec::new(),
        attributed: Vec::new(),
    };
    let mut out = String::from("root R {\n");
    out.push_str(&g.children(0, "  "));
    out.push_str("}\n");
    let n = g.rng.random_range(0..=2);
    if n > 0 {
        out.push_str("constraints {\n");
        for _ in 0..n {
            let c = g.constraint();
            out.push_str(&format!("  {c}\n"));
        }
        out.push_str("}\n");
    }
    out
}

/// Every instance path and attribute key the model admits, enumerated from
/// the feature tree and declared cardinalities.
pub struct Universe {
    pub instances: Vec<InstancePath>,
    pub values: Vec<(AttrKey, Value)>,
}

impl Universe {
    pub fn of(model: &FeatureModel) -> Universe {
        let mut u = Universe { instances: Vec::new(), values: Vec::new() };
        for &c in &model.root().children {
            u.walk(model, c, &InstancePath::root());
        }
        u
    }

    fn walk(&mut self, model: &FeatureModel, id: FeatureId, parent: &InstancePath) {
        let f = model.feature(id);
        let segs: Vec<Segment> = if f.is_multi() {
            (1..=f.cardinality.max).map(|i| Segment::indexed(&f.name, i)).collect()
        } else {
            vec![Segment::single(&f.name)]
        };
        for seg in segs {
            let path = parent.child(seg);
            self.instances.push(path.clone());
            for a in &f.attributes {
                for v in &a.domain {
                    self.values.push((AttrKey { owner: path.clone(), attr: a.name.clone() }, v.clone()));
                }
            }
            for &c in &f.children {
                self.walk(model, c, &path);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len() + self.values.len()
    }

    /// The configuration a truth assignment stands for, or `None` when it
    /// binds one attribute twice.
    pub fn decode(&self, mask: u64) -> Option<Configuration> {
        let mut cfg = Configuration::new();
        for (i, p) in self.instances.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cfg.selections.insert(p.clone());
            }
        }
        let base = self.instances.len();
        let mut seen: BTreeMap<&AttrKey, usize> = BTreeMap::new();
        for (j, (k, v)) in self.values.iter().enumerate() {
            if mask >> (base + j) & 1 == 1 {
                *seen.entry(k).or_default() += 1;
                cfg.bindings.insert(k.clone(), v.clone());
            }
        }
        seen.values().all(|&n| n == 1).then_some(cfg)
    }

    /// Configurations among all `2^len` assignments accepted by `valid`.
    pub fn filter(&self, valid: impl Fn(&Configuration) -> bool) -> BTreeSet<Configuration> {
        (0..1u64 << self.len()).filter_map(|m| self.decode(m)).filter(|c| valid(c)).collect()
    }
}
