//! Bounded flattening of a feature model into a Boolean model, lifting of
//! Boolean assignments back into configurations, and CNF output.

mod cnf;
mod file;
mod formula;

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::fm::{
    AttrKey, Configuration, FeatureId, FeatureModel, Ground, GroundAtom, GroupKind, InstanceBounds, InstancePath,
    Segment, Value,
};

pub use cnf::{formulas_to_cnf, to_cnf, CnfFormula, Lit};
pub use file::{read_flat, write_flat, FlatFile, FlatFileError, VarKind};
pub use formula::Formula;

/// What a Boolean variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    Instance(InstancePath),
    AttributeValue { key: AttrKey, value: Value },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Instance(p) => write!(f, "{p}"),
            Provenance::AttributeValue { key, value } => write!(f, "{key}={value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolVar {
    pub name: String,
    pub provenance: Provenance,
}

/// The value variables of one attribute of one instance. `owner` is `None`
/// for root attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeGroup {
    pub owner: Option<usize>,
    pub key: AttrKey,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BooleanModel {
    pub variables: Vec<BoolVar>,
    pub constraints: Vec<Formula>,
    pub attribute_groups: Vec<AttributeGroup>,
    index: HashMap<Provenance, usize>,
}

/// Per-feature instance bounds used for flattening. Features not listed use
/// their declared maximum.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlattenBounds {
    bounds: BTreeMap<FeatureId, u32>,
}

impl InstanceBounds for FlattenBounds {
    fn max_instances(&self, model: &FeatureModel, feature: FeatureId) -> u32 {
        self.bounds
            .get(&feature)
            .copied()
            .unwrap_or_else(|| model.feature(feature).cardinality.max)
    }
}

impl FlattenBounds {
    pub fn declared() -> Self {
        Self::default()
    }

    pub fn set(&mut self, model: &FeatureModel, feature: FeatureId, bound: u32) -> Result<(), FlattenError> {
        let f = model.feature(feature);
        if !f.is_multi() {
            return Err(FlattenError::NotMultiFeature(model.qualified_name(feature)));
        }
        let card = f.cardinality;
        if bound < card.min || bound > card.max {
            return Err(FlattenError::BoundOutOfRange {
                feature: model.qualified_name(feature),
                bound,
                min: card.min,
                max: card.max,
            });
        }
        self.bounds.insert(feature, bound);
        Ok(())
    }

    /// Builds bounds from `(name, bound)` pairs where `name` is a
    /// `/`-separated suffix of a feature's name path.
    pub fn from_names(model: &FeatureModel, pairs: &[(&str, u32)]) -> Result<Self, FlattenError> {
        let mut out = Self::default();
        for (name, bound) in pairs {
            let segs: Vec<&str> = name.split('/').collect();
            let found = model.features_with_suffix(&segs);
            match found.as_slice() {
                [id] => out.set(model, *id, *bound)?,
                [] => return Err(FlattenError::UnknownFeature(name.to_string())),
                _ => return Err(FlattenError::AmbiguousFeature(name.to_string())),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature name `{0}` is ambiguous")]
    AmbiguousFeature(String),
    #[error("`{0}` is not a multi-feature")]
    NotMultiFeature(String),
    #[error("bound {bound} for `{feature}` is outside its cardinality [{min}..{max}]")]
    BoundOutOfRange { feature: String, bound: u32, min: u32, max: u32 },
    #[error("`{feature}` declares attribute `{attr}` twice")]
    DuplicateAttribute { feature: String, attr: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("assignment has {got} values, the model has {expected} variables")]
    AssignmentTooShort { got: usize, expected: usize },
    #[error("`{0}` has more than one value")]
    MultipleValues(AttrKey),
    #[error("`{0}` has no value")]
    MissingValue(AttrKey),
    #[error("`{0}` has a value although its instance is unselected")]
    OrphanValue(AttrKey),
    #[error("`{0}` has no variable in the flattened model")]
    NotInModel(String),
}

struct Builder<'a, B: InstanceBounds> {
    model: &'a FeatureModel,
    bounds: &'a B,
    bm: BooleanModel,
}

fn guarded(guard: Option<usize>, f: Formula) -> Formula {
    match guard {
        Some(g) => Formula::implies(Formula::Var(g), f),
        None => f,
    }
}

impl<B: InstanceBounds> Builder<'_, B> {
    fn add_var(&mut self, provenance: Provenance) -> usize {
        let id = self.bm.variables.len();
        self.bm.variables.push(BoolVar { name: provenance.to_string(), provenance: provenance.clone() });
        self.bm.index.insert(provenance, id);
        id
    }

    /// Adds attribute variables and children of the instance at `path`.
    fn expand(&mut self, feature: FeatureId, path: &InstancePath, var: Option<usize>) {
        let f = self.model.feature(feature);
        for a in &f.attributes {
            let key = AttrKey { owner: path.clone(), attr: a.name.clone() };
            let mut values = Vec::new();
            for v in &a.domain {
                let x = self.add_var(Provenance::AttributeValue { key: key.clone(), value: v.clone() });
                if let Some(o) = var {
                    self.bm.constraints.push(Formula::implies(Formula::Var(x), Formula::Var(o)));
                }
                values.push(x);
            }
            let one = Formula::ExactlyOne(values.iter().map(|&x| Formula::Var(x)).collect());
            self.bm.constraints.push(guarded(var, one));
            self.bm.attribute_groups.push(AttributeGroup { owner: var, key, values });
        }

        let mut direct = Vec::new();
        for &c in &f.children {
            let child = self.model.feature(c);
            if child.is_multi() {
                let bound = self.bounds.max_instances(self.model, c);
                let mut prev = None;
                for k in 1..=bound {
                    let p = path.child(Segment::indexed(child.name.clone(), k));
                    let x = self.add_var(Provenance::Instance(p.clone()));
                    if let Some(o) = var {
                        self.bm.constraints.push(Formula::implies(Formula::Var(x), Formula::Var(o)));
                    }
                    if let Some(q) = prev {
                        self.bm.constraints.push(Formula::implies(Formula::Var(x), Formula::Var(q)));
                    }
                    if k <= child.cardinality.min {
                        self.bm.constraints.push(guarded(var, Formula::Var(x)));
                    }
                    prev = Some(x);
                    self.expand(c, &p, Some(x));
                }
            } else {
                let p = path.child(Segment::single(child.name.clone()));
                let x = self.add_var(Provenance::Instance(p.clone()));
                if let Some(o) = var {
                    self.bm.constraints.push(Formula::implies(Formula::Var(x), Formula::Var(o)));
                }
                if f.group == GroupKind::And && child.cardinality.min >= 1 {
                    self.bm.constraints.push(guarded(var, Formula::Var(x)));
                }
                direct.push(x);
                self.expand(c, &p, Some(x));
            }
        }
        if !direct.is_empty() {
            let members: Vec<Formula> = direct.iter().map(|&x| Formula::Var(x)).collect();
            match f.group {
                GroupKind::Alternative => self.bm.constraints.push(guarded(var, Formula::ExactlyOne(members))),
                GroupKind::Or => self.bm.constraints.push(guarded(var, Formula::Or(members))),
                GroupKind::And => {}
            }
        }
    }

    fn atom(&self, a: &GroundAtom) -> Formula {
        let Some(&x) = self.bm.index.get(&Provenance::Instance(a.path.clone())) else {
            return Formula::Const(false);
        };
        if a.bindings.is_empty() {
            return Formula::Var(x);
        }
        let mut parts = vec![Formula::Var(x)];
        for (attr, value) in &a.bindings {
            let key = AttrKey { owner: a.path.clone(), attr: attr.clone() };
            match self.bm.index.get(&Provenance::AttributeValue { key, value: value.clone() }) {
                Some(&v) => parts.push(Formula::Var(v)),
                None => return Formula::Const(false),
            }
        }
        Formula::And(parts)
    }

    fn translate(&self, g: &Ground) -> Formula {
        match g {
            Ground::Const(b) => Formula::Const(*b),
            Ground::Atom(a) => self.atom(a),
            Ground::Not(x) => Formula::not(self.translate(x)),
            Ground::And(xs) => Formula::And(xs.iter().map(|x| self.translate(x)).collect()),
            Ground::Or(xs) => Formula::Or(xs.iter().map(|x| self.translate(x)).collect()),
            Ground::Implies(a, b) => Formula::implies(self.translate(a), self.translate(b)),
            Ground::Iff(a, b) => Formula::iff(self.translate(a), self.translate(b)),
            Ground::AtMostOne(xs) => Formula::AtMostOne(xs.iter().map(|x| self.translate(x)).collect()),
        }
    }
}

/// Flattens `model` with the given instance bounds. Variables are laid out in
/// depth-first pre-order: an instance, then its attribute values, then its
/// children. The root is always selected and has no variable.
pub fn flatten(model: &FeatureModel, bounds: &FlattenBounds) -> Result<BooleanModel, FlattenError> {
    for id in model.ids() {
        let f = model.feature(id);
        for (i, a) in f.attributes.iter().enumerate() {
            if f.attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(FlattenError::DuplicateAttribute {
                    feature: model.qualified_name(id),
                    attr: a.name.clone(),
                });
            }
        }
    }
    let mut b = Builder {
        model,
        bounds,
        bm: BooleanModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            attribute_groups: Vec::new(),
            index: HashMap::new(),
        },
    };
    b.expand(FeatureId::ROOT, &InstancePath::root(), None);
    for c in &model.constraints {
        for g in c.ground(model, bounds) {
            let f = b.translate(&g);
            b.bm.constraints.push(f);
        }
    }
    Ok(b.bm)
}

impl BooleanModel {
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn var_of(&self, provenance: &Provenance) -> Option<usize> {
        self.index.get(provenance).copied()
    }

    pub fn instance_var(&self, path: &InstancePath) -> Option<usize> {
        self.var_of(&Provenance::Instance(path.clone()))
    }

    /// Evaluates every constraint on a full assignment of the model variables.
    pub fn satisfies(&self, assignment: &[bool]) -> bool {
        self.constraints.iter().all(|c| c.eval(assignment))
    }

    /// Identity of the variable layout; selections from different layouts are
    /// not comparable.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for v in &self.variables {
            v.name.hash(&mut h);
        }
        h.finish()
    }

    /// Variable ids that are true under `config`, sorted.
    pub fn selection(&self, config: &Configuration) -> Result<Vec<usize>, LiftError> {
        let mut out = Vec::with_capacity(config.selections.len() + config.bindings.len());
        for p in &config.selections {
            out.push(self.instance_var(p).ok_or_else(|| LiftError::NotInModel(p.to_string()))?);
        }
        for (key, value) in &config.bindings {
            let prov = Provenance::AttributeValue { key: key.clone(), value: value.clone() };
            out.push(self.var_of(&prov).ok_or_else(|| LiftError::NotInModel(prov.to_string()))?);
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn assignment_of(&self, config: &Configuration) -> Result<Vec<bool>, LiftError> {
        let mut a = vec![false; self.len()];
        for v in self.selection(config)? {
            a[v] = true;
        }
        Ok(a)
    }
}

/// Maps an assignment of (at least) the model variables back to a
/// configuration. Extra entries such as CNF auxiliaries are ignored.
pub fn lift(bm: &BooleanModel, assignment: &[bool]) -> Result<Configuration, LiftError> {
    if assignment.len() < bm.len() {
        return Err(LiftError::AssignmentTooShort { got: assignment.len(), expected: bm.len() });
    }
    let mut config = Configuration::new();
    for (v, var) in bm.variables.iter().enumerate() {
        if !assignment[v] {
            continue;
        }
        match &var.provenance {
            Provenance::Instance(p) => {
                config.selections.insert(p.clone());
            }
            Provenance::AttributeValue { key, value } => {
                if config.bindings.insert(key.clone(), value.clone()).is_some() {
                    return Err(LiftError::MultipleValues(key.clone()));
                }
            }
        }
    }
    for g in &bm.attribute_groups {
        let owner_on = g.owner.is_none_or(|o| assignment[o]);
        let bound = config.bindings.contains_key(&g.key);
        if owner_on && !bound {
            return Err(LiftError::MissingValue(g.key.clone()));
        }
        if !owner_on && bound {
            return Err(LiftError::OrphanValue(g.key.clone()));
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::{check_configuration_within, parse_fm};

    const MODEL: &str = "root R {
        attr mode in {a, b};
        mandatory M { }
        optional O { attr k in {1, 3}; }
        Block [1..3] { mandatory Kind { alternative { X { } Y { } } } }
      }
      constraints { O requires Block#2; }";

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u64..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    #[test]
    fn layout_is_preorder() {
        let m = parse_fm(MODEL).unwrap();
        let bm = flatten(&m, &FlattenBounds::from_names(&m, &[("Block", 2)]).unwrap()).unwrap();
        let names: Vec<&str> = bm.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(
            names,
            [
                ".mode=a", ".mode=b", "M", "O", "O.k=1", "O.k=3", "Block#1", "Block#1/Kind", "Block#1/Kind/X",
                "Block#1/Kind/Y", "Block#2", "Block#2/Kind", "Block#2/Kind/X", "Block#2/Kind/Y"
            ]
        );
    }

    #[test]
    fn boolean_models_match_direct_check() {
        let m = parse_fm(MODEL).unwrap();
        let bounds = FlattenBounds::from_names(&m, &[("Block", 2)]).unwrap();
        let bm = flatten(&m, &bounds).unwrap();
        let mut count = 0;
        for a in all_assignments(bm.len()) {
            if !bm.satisfies(&a) {
                continue;
            }
            count += 1;
            let c = lift(&bm, &a).unwrap();
            let r = check_configuration_within(&m, &c, &bounds).unwrap();
            assert!(r.is_valid(), "{r:?}");
            assert_eq!(bm.assignment_of(&c).unwrap(), a);
        }
        // mode 2 x [O absent: B1 (2) + B1B2 (4)] + [O present: k 2 x B1B2 (4)] = 2 x (6 + 8)
        assert_eq!(count, 28);
    }

    #[test]
    fn bound_checks() {
        let m = parse_fm(MODEL).unwrap();
        assert!(matches!(
            FlattenBounds::from_names(&m, &[("Block", 0)]),
            Err(FlattenError::BoundOutOfRange { .. })
        ));
        assert!(matches!(
            FlattenBounds::from_names(&m, &[("Block", 4)]),
            Err(FlattenError::BoundOutOfRange { .. })
        ));
        assert!(matches!(FlattenBounds::from_names(&m, &[("M", 1)]), Err(FlattenError::NotMultiFeature(_))));
        assert!(matches!(FlattenBounds::from_names(&m, &[("Q", 1)]), Err(FlattenError::UnknownFeature(_))));
    }

    #[test]
    fn lift_rejects_inconsistent_values() {
        let m = parse_fm(MODEL).unwrap();
        let bm = flatten(&m, &FlattenBounds::declared()).unwrap();
        let mut a = vec![false; bm.len()];
        assert!(matches!(lift(&bm, &a), Err(LiftError::MissingValue(_))));
        a[0] = true;
        a[1] = true;
        assert!(matches!(lift(&bm, &a), Err(LiftError::MultipleValues(_))));
        a[1] = false;
        a[4] = true;
        assert!(matches!(lift(&bm, &a), Err(LiftError::OrphanValue(_))));
        assert!(matches!(lift(&bm, &a[..2]), Err(LiftError::AssignmentTooShort { .. })));
    }
}
