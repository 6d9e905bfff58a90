//! Direct semantic check of a configuration against the extended feature-model
//! semantics. This path never goes through the Boolean encoding and serves as
//! the oracle for it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::config::{AttrKey, Configuration, InstancePath, PathError, Segment};
use super::constraint::{ConstraintKind, Declared, GroundAtom, InstanceBounds};
use super::model::{FeatureId, FeatureModel, GroupKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    MissingParent,
    Mandatory,
    Alternative,
    OrGroup,
    InstanceOrdering,
    Cardinality,
    AttributeMissing,
    AttributeOnUnselected,
    Requires,
    Excludes,
    RequiresWithAttributes,
    Propositional,
}

impl From<ConstraintKind> for ViolationKind {
    fn from(k: ConstraintKind) -> Self {
        match k {
            ConstraintKind::Requires => ViolationKind::Requires,
            ConstraintKind::Excludes => ViolationKind::Excludes,
            ConstraintKind::RequiresWithAttributes => ViolationKind::RequiresWithAttributes,
            ConstraintKind::Propositional => ViolationKind::Propositional,
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::MissingParent => "missing parent",
            ViolationKind::Mandatory => "mandatory",
            ViolationKind::Alternative => "alternative",
            ViolationKind::OrGroup => "or-group",
            ViolationKind::InstanceOrdering => "instance ordering",
            ViolationKind::Cardinality => "cardinality",
            ViolationKind::AttributeMissing => "attribute missing",
            ViolationKind::AttributeOnUnselected => "attribute on unselected instance",
            ViolationKind::Requires => "requires",
            ViolationKind::Excludes => "excludes",
            ViolationKind::RequiresWithAttributes => "requires with attributes",
            ViolationKind::Propositional => "propositional",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Checks `config` against `model` using each multi-feature's declared maximum.
pub fn check_configuration(
    model: &FeatureModel,
    config: &Configuration,
) -> Result<ValidityReport, PathError> {
    check_configuration_within(model, config, &Declared)
}

/// Like [`check_configuration`] but with explicit per-feature instance bounds.
pub fn check_configuration_within(
    model: &FeatureModel,
    config: &Configuration,
    bounds: &impl InstanceBounds,
) -> Result<ValidityReport, PathError> {
    let mut report = ValidityReport::default();
    let mut push = |kind: ViolationKind, message: String| {
        report.violations.push(Violation { kind, message });
    };

    // Resolve every reference first: unknown paths are errors, not violations.
    let mut feature_of: BTreeMap<&InstancePath, FeatureId> = BTreeMap::new();
    for path in &config.selections {
        let r = model.resolve(path)?;
        feature_of.insert(path, r.feature);
    }
    for (key, value) in &config.bindings {
        let owner = model.resolve(&key.owner)?;
        let attr = model
            .feature(owner.feature)
            .attribute(&key.attr)
            .ok_or_else(|| PathError::UnknownAttribute(key.clone()))?;
        if !attr.domain.contains(value) {
            return Err(PathError::UnknownValue { key: key.clone(), value: value.clone() });
        }
    }

    for (path, &feature) in &feature_of {
        if let Some(parent) = path.parent() {
            if !config.is_selected(&parent) {
                push(ViolationKind::MissingParent, format!("`{path}` selected without `{parent}`"));
            }
        }
        if let Some(k) = path.last().and_then(|s| s.index) {
            let max = bounds.max_instances(model, feature);
            if k > max {
                push(ViolationKind::Cardinality, format!("`{path}` exceeds the maximum of {max} instances"));
            }
        }
    }

    for key in config.bindings.keys() {
        if !config.is_selected(&key.owner) {
            push(ViolationKind::AttributeOnUnselected, format!("`{key}` bound on an unselected instance"));
        }
    }

    let mut selected: Vec<(InstancePath, FeatureId)> = vec![(InstancePath::root(), FeatureId::ROOT)];
    selected.extend(feature_of.iter().map(|(p, f)| ((*p).clone(), *f)));
    for (path, feature) in &selected {
        let f = model.feature(*feature);
        for a in &f.attributes {
            let key = AttrKey { owner: path.clone(), attr: a.name.clone() };
            if !config.bindings.contains_key(&key) {
                push(ViolationKind::AttributeMissing, format!("`{key}` has no value"));
            }
        }
        let shown = if path.is_root() { f.name.clone() } else { path.to_string() };
        match f.group {
            GroupKind::And => {
                for &c in &f.children {
                    let child = model.feature(c);
                    if child.is_multi() {
                        let present: BTreeSet<u32> = config
                            .selections
                            .iter()
                            .filter(|p| p.parent().as_ref() == Some(path))
                            .filter_map(|p| p.last().filter(|s| s.name == child.name).and_then(|s| s.index))
                            .collect();
                        for &k in &present {
                            if let Some(missing) = (1..k).find(|l| !present.contains(l)) {
                                push(
                                    ViolationKind::InstanceOrdering,
                                    format!("`{shown}`: {}#{k} selected without {}#{missing}", child.name, child.name),
                                );
                            }
                        }
                        if (present.len() as u32) < child.cardinality.min {
                            push(
                                ViolationKind::Cardinality,
                                format!(
                                    "`{shown}`: {} instances of {}, at least {} required",
                                    present.len(),
                                    child.name,
                                    child.cardinality.min
                                ),
                            );
                        }
                    } else if child.cardinality.min >= 1
                        && !config.is_selected(&path.child(Segment::single(child.name.clone())))
                    {
                        push(ViolationKind::Mandatory, format!("`{shown}` lacks mandatory `{}`", child.name));
                    }
                }
            }
            GroupKind::Or | GroupKind::Alternative => {
                let count = f
                    .children
                    .iter()
                    .filter(|c| config.is_selected(&path.child(Segment::single(model.feature(**c).name.clone()))))
                    .count();
                if f.group == GroupKind::Alternative && count != 1 && !f.children.is_empty() {
                    push(ViolationKind::Alternative, format!("`{shown}` selects {count} alternatives"));
                }
                if f.group == GroupKind::Or && count == 0 && !f.children.is_empty() {
                    push(ViolationKind::OrGroup, format!("`{shown}` selects none of its or-children"));
                }
            }
        }
    }

    let holds = |atom: &GroundAtom| {
        config.is_selected(&atom.path)
            && atom
                .bindings
                .iter()
                .all(|(a, v)| config.binding(&atom.path, a) == Some(v))
    };
    for c in &model.constraints {
        if c.ground(model, bounds).iter().any(|g| !g.eval(&holds)) {
            push(c.kind.into(), format!("constraint `{c}` violated"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::parse_fm;

    fn cfg(lines: &str) -> Configuration {
        Configuration::parse_fncfg(lines).unwrap()
    }

    const MODEL: &str = "root R {
        mandatory M { }
        optional O { attr k in {1, 3, 5}; }
        mandatory G { alternative { A { } B { } C { } } }
        optional H { or { X { } Y { } } }
        Block [0..3] { optional Leaf { } }
      }
      constraints {
        O excludes Block;
        X requires O(k=3);
        Y requires M;
      }";

    #[test]
    fn valid_configuration() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nBlock#1\nBlock#2\nBlock#2/Leaf\n")).unwrap();
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn mandatory_child_missing() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("G\nG/A\n")).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert!(r.has(ViolationKind::Mandatory));
    }

    #[test]
    fn two_alternatives() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nG/B\n")).unwrap();
        assert!(r.has(ViolationKind::Alternative));
    }

    #[test]
    fn empty_or_group() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nH\n")).unwrap();
        assert!(r.has(ViolationKind::OrGroup));
    }

    #[test]
    fn instance_gap() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nBlock#1\nBlock#3\n")).unwrap();
        assert!(r.has(ViolationKind::InstanceOrdering));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn cross_tree_constraints() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nO {k=1}\nBlock#1\n")).unwrap();
        assert!(r.has(ViolationKind::Excludes));
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nO {k=1}\nH\nH/X\n")).unwrap();
        assert!(r.has(ViolationKind::RequiresWithAttributes));
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nO {k=3}\nH\nH/X\n")).unwrap();
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn attribute_rules() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nO\n")).unwrap();
        assert!(r.has(ViolationKind::AttributeMissing));
        let mut c = cfg("M\nG\nG/A\n");
        c.bindings.insert(AttrKey { owner: "O".parse().unwrap(), attr: "k".into() }, crate::fm::Value::Int(5));
        let r = check_configuration(&m, &c).unwrap();
        assert!(r.has(ViolationKind::AttributeOnUnselected));
    }

    #[test]
    fn unknown_paths_are_errors() {
        let m = parse_fm(MODEL).unwrap();
        assert!(matches!(check_configuration(&m, &cfg("Nope\n")), Err(PathError::Unknown(_))));
        assert!(matches!(check_configuration(&m, &cfg("Block\n")), Err(PathError::Unknown(_))));
        assert!(matches!(check_configuration(&m, &cfg("M#1\n")), Err(PathError::Unknown(_))));
        assert!(matches!(check_configuration(&m, &cfg("O {k=2}\n")), Err(PathError::UnknownValue { .. })));
        assert!(matches!(check_configuration(&m, &cfg("O {z=1}\n")), Err(PathError::UnknownAttribute(_))));
    }

    #[test]
    fn over_maximum_is_cardinality_violation() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nBlock#1\nBlock#2\nBlock#3\nBlock#4\n")).unwrap();
        assert!(r.has(ViolationKind::Cardinality));
    }

    #[test]
    fn selecting_child_without_parent() {
        let m = parse_fm(MODEL).unwrap();
        let r = check_configuration(&m, &cfg("M\nG\nG/A\nBlock#1/Leaf\n")).unwrap();
        assert!(r.has(ViolationKind::MissingParent));
    }
}
