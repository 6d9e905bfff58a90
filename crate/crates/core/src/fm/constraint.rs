//! Cross-tree constraints and their grounding onto feature instances.
//!
//! A reference such as `Cell#1/Output/CellOutput` names every feature whose
//! path ends with those names. Multi-levels that the reference does not index
//! explicitly are *free*. A constraint is instantiated once per assignment of
//! the free levels shared by its references, so `Convolution requires Relu`
//! holds inside each cell separately. Aggregates (`some`, `one`, `lone`) close
//! over all free levels of their argument instead of aligning with the rest
//! of the formula.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::config::InstancePath;
use super::model::{FeatureId, FeatureModel, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefSegment {
    pub name: String,
    pub index: Option<u32>,
}

/// Reference to one or more features, optionally constrained on attribute values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRef {
    pub segments: Vec<RefSegment>,
    pub bindings: Vec<(String, Value)>,
    /// Features matched by `segments`, filled in during parsing.
    pub targets: Vec<FeatureId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// At least one instance.
    Some,
    /// Exactly one instance.
    One,
    /// At most one instance.
    Lone,
}

impl Aggregate {
    pub fn keyword(self) -> &'static str {
        match self {
            Aggregate::Some => "some",
            Aggregate::One => "one",
            Aggregate::Lone => "lone",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ref(FeatureRef),
    Count(Aggregate, FeatureRef),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Requires,
    Excludes,
    RequiresWithAttributes,
    Propositional,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Requires => "requires",
            ConstraintKind::Excludes => "excludes",
            ConstraintKind::RequiresWithAttributes => "requires-with-attributes",
            ConstraintKind::Propositional => "propositional",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossConstraint {
    pub kind: ConstraintKind,
    pub expr: Expr,
}

impl CrossConstraint {
    pub fn requires(a: FeatureRef, b: FeatureRef) -> Self {
        let kind = if b.bindings.is_empty() {
            ConstraintKind::Requires
        } else {
            ConstraintKind::RequiresWithAttributes
        };
        CrossConstraint { kind, expr: Expr::Implies(Box::new(Expr::Ref(a)), Box::new(Expr::Ref(b))) }
    }

    pub fn excludes(a: FeatureRef, b: FeatureRef) -> Self {
        CrossConstraint {
            kind: ConstraintKind::Excludes,
            expr: Expr::Not(Box::new(Expr::And(vec![Expr::Ref(a), Expr::Ref(b)]))),
        }
    }

    pub fn propositional(expr: Expr) -> Self {
        CrossConstraint { kind: ConstraintKind::Propositional, expr }
    }
}

/// An instance-level atom: the instance is selected and every listed
/// attribute is bound to the given value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtom {
    pub path: InstancePath,
    pub bindings: Vec<(String, Value)>,
}

/// A constraint instantiated on concrete instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ground {
    Const(bool),
    Atom(GroundAtom),
    Not(Box<Ground>),
    And(Vec<Ground>),
    Or(Vec<Ground>),
    Implies(Box<Ground>, Box<Ground>),
    Iff(Box<Ground>, Box<Ground>),
    AtMostOne(Vec<Ground>),
}

impl Ground {
    pub fn eval(&self, atom: &impl Fn(&GroundAtom) -> bool) -> bool {
        match self {
            Ground::Const(b) => *b,
            Ground::Atom(a) => atom(a),
            Ground::Not(g) => !g.eval(atom),
            Ground::And(gs) => gs.iter().all(|g| g.eval(atom)),
            Ground::Or(gs) => gs.iter().any(|g| g.eval(atom)),
            Ground::Implies(a, b) => !a.eval(atom) || b.eval(atom),
            Ground::Iff(a, b) => a.eval(atom) == b.eval(atom),
            Ground::AtMostOne(gs) => gs.iter().filter(|g| g.eval(atom)).count() <= 1,
        }
    }
}

/// Upper instance bound for each multi-feature.
pub trait InstanceBounds {
    fn max_instances(&self, model: &FeatureModel, feature: FeatureId) -> u32;
}

/// Uses each feature's declared maximum.
pub struct Declared;

impl InstanceBounds for Declared {
    fn max_instances(&self, model: &FeatureModel, feature: FeatureId) -> u32 {
        model.feature(feature).cardinality.max
    }
}

impl FeatureRef {
    /// Explicitly indexed multi-levels of `target` (the feature matched by the
    /// last segment). Segments align with the tail of the target's path.
    fn fixed_levels(&self, model: &FeatureModel, target: FeatureId) -> BTreeMap<FeatureId, u32> {
        let path = model.path(target);
        let offset = path.len() - self.segments.len();
        self.segments
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.index.map(|k| (path[offset + i], k)))
            .collect()
    }

    fn free_levels(&self, model: &FeatureModel, target: FeatureId) -> Vec<FeatureId> {
        let fixed = self.fixed_levels(model, target);
        model
            .multi_levels(target)
            .into_iter()
            .filter(|l| !fixed.contains_key(l))
            .collect()
    }

    fn atom(
        &self,
        model: &FeatureModel,
        target: FeatureId,
        context: &BTreeMap<FeatureId, u32>,
    ) -> GroundAtom {
        let fixed = self.fixed_levels(model, target);
        let path = model.instance_path(target, |level| {
            fixed.get(&level).or_else(|| context.get(&level)).copied().unwrap_or(1)
        });
        GroundAtom { path, bindings: self.bindings.clone() }
    }

    fn in_bounds(
        &self,
        model: &FeatureModel,
        target: FeatureId,
        bounds: &impl InstanceBounds,
    ) -> bool {
        self.fixed_levels(model, target)
            .iter()
            .all(|(l, k)| *k <= bounds.max_instances(model, *l))
    }

    /// Instance atoms of this reference in one context (disjunction over targets).
    fn ground_in(
        &self,
        model: &FeatureModel,
        context: &BTreeMap<FeatureId, u32>,
        bounds: &impl InstanceBounds,
    ) -> Ground {
        let atoms: Vec<Ground> = self
            .targets
            .iter()
            .filter(|t| self.in_bounds(model, **t, bounds))
            .map(|t| Ground::Atom(self.atom(model, *t, context)))
            .collect();
        match atoms.len() {
            0 => Ground::Const(false),
            1 => atoms.into_iter().next().unwrap(),
            _ => Ground::Or(atoms),
        }
    }

    /// Every instance atom of this reference over all of its free levels.
    fn all_atoms(&self, model: &FeatureModel, bounds: &impl InstanceBounds) -> Vec<Ground> {
        let mut out = Vec::new();
        for &t in &self.targets {
            if !self.in_bounds(model, t, bounds) {
                continue;
            }
            let levels = self.free_levels(model, t);
            for ctx in contexts(model, &levels, bounds) {
                out.push(Ground::Atom(self.atom(model, t, &ctx)));
            }
        }
        out
    }
}

/// Cartesian product of instance indices over `levels`.
fn contexts(
    model: &FeatureModel,
    levels: &[FeatureId],
    bounds: &impl InstanceBounds,
) -> Vec<BTreeMap<FeatureId, u32>> {
    let mut out = vec![BTreeMap::new()];
    for &level in levels {
        let max = bounds.max_instances(model, level);
        out = out
            .into_iter()
            .flat_map(|ctx| {
                (1..=max).map(move |k| {
                    let mut c = ctx.clone();
                    c.insert(level, k);
                    c
                })
            })
            .collect();
    }
    out
}

impl Expr {
    fn aligned_refs<'a>(&'a self, out: &mut Vec<&'a FeatureRef>) {
        match self {
            Expr::Ref(r) => out.push(r),
            Expr::Count(..) => {}
            Expr::Not(e) => e.aligned_refs(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.aligned_refs(out)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.aligned_refs(out);
                b.aligned_refs(out);
            }
        }
    }

    fn ground_in(
        &self,
        model: &FeatureModel,
        ctx: &BTreeMap<FeatureId, u32>,
        bounds: &impl InstanceBounds,
    ) -> Ground {
        match self {
            Expr::Ref(r) => r.ground_in(model, ctx, bounds),
            Expr::Count(agg, r) => {
                let atoms = r.all_atoms(model, bounds);
                match agg {
                    Aggregate::Some => Ground::Or(atoms),
                    Aggregate::Lone => Ground::AtMostOne(atoms),
                    Aggregate::One => {
                        Ground::And(vec![Ground::Or(atoms.clone()), Ground::AtMostOne(atoms)])
                    }
                }
            }
            Expr::Not(e) => Ground::Not(Box::new(e.ground_in(model, ctx, bounds))),
            Expr::And(es) => Ground::And(es.iter().map(|e| e.ground_in(model, ctx, bounds)).collect()),
            Expr::Or(es) => Ground::Or(es.iter().map(|e| e.ground_in(model, ctx, bounds)).collect()),
            Expr::Implies(a, b) => Ground::Implies(
                Box::new(a.ground_in(model, ctx, bounds)),
                Box::new(b.ground_in(model, ctx, bounds)),
            ),
            Expr::Iff(a, b) => Ground::Iff(
                Box::new(a.ground_in(model, ctx, bounds)),
                Box::new(b.ground_in(model, ctx, bounds)),
            ),
        }
    }
}

impl CrossConstraint {
    /// Instantiates the constraint once per assignment of its shared free levels.
    pub fn ground(&self, model: &FeatureModel, bounds: &impl InstanceBounds) -> Vec<Ground> {
        let mut refs = Vec::new();
        self.expr.aligned_refs(&mut refs);
        let mut levels: BTreeSet<(usize, FeatureId)> = BTreeSet::new();
        for r in refs {
            for &t in &r.targets {
                for l in r.free_levels(model, t) {
                    levels.insert((model.path(l).len(), l));
                }
            }
        }
        let levels: Vec<FeatureId> = levels.into_iter().map(|(_, l)| l).collect();
        contexts(model, &levels, bounds)
            .iter()
            .map(|ctx| self.expr.ground_in(model, ctx, bounds))
            .collect()
    }
}

impl fmt::Display for RefSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(k) = self.index {
            write!(f, "#{k}")?;
        }
        Ok(())
    }
}

impl fmt::Display for FeatureRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{s}")?;
        }
        if !self.bindings.is_empty() {
            f.write_str("(")?;
            for (i, (a, v)) in self.bindings.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}={v}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Iff(..) => 1,
            Expr::Implies(..) => 2,
            Expr::Or(_) => 3,
            Expr::And(_) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, child: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Ref(r) => write!(f, "{r}"),
            Expr::Count(agg, r) => write!(f, "{}({r})", agg.keyword()),
            Expr::Not(e) => {
                f.write_str("!")?;
                self.fmt_child(e, 5, f)
            }
            Expr::And(es) | Expr::Or(es) => {
                let (op, p) = if matches!(self, Expr::And(_)) { (" & ", 5) } else { (" | ", 4) };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    self.fmt_child(e, p, f)?;
                }
                Ok(())
            }
            Expr::Implies(a, b) => {
                // right-associative
                self.fmt_child(a, 3, f)?;
                f.write_str(" -> ")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Iff(a, b) => {
                self.fmt_child(a, 2, f)?;
                f.write_str(" <-> ")?;
                self.fmt_child(b, 2, f)
            }
        }
    }
}

impl fmt::Display for CrossConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.expr) {
            (ConstraintKind::Requires | ConstraintKind::RequiresWithAttributes, Expr::Implies(a, b)) => {
                write!(f, "{a} requires {b}")
            }
            (ConstraintKind::Excludes, Expr::Not(inner)) => match inner.as_ref() {
                Expr::And(es) if es.len() == 2 => write!(f, "{} excludes {}", es[0], es[1]),
                _ => write!(f, "{}", self.expr),
            },
            _ => write!(f, "{}", self.expr),
        }
    }
}
