use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::constraint::CrossConstraint;

/// Index of a feature inside [`FeatureModel::features`]. The root is always `FeatureId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub usize);

impl FeatureId {
    pub const ROOT: FeatureId = FeatureId(0);
}

/// Allowed instance count `[min..max]` of a feature. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cardinality {
    pub min: u32,
    pub max: u32,
}

impl Cardinality {
    pub const MANDATORY: Cardinality = Cardinality { min: 1, max: 1 };
    pub const OPTIONAL: Cardinality = Cardinality { min: 0, max: 1 };

    pub fn new(min: u32, max: u32) -> Option<Self> {
        (min <= max && max >= 1).then_some(Cardinality { min, max })
    }

    pub fn is_multi(&self) -> bool {
        self.max > 1
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.min, self.max)
    }
}

/// How the children of a feature are decomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// Each child carries its own cardinality (mandatory, optional or multi).
    And,
    /// At least one child when the parent is selected.
    Or,
    /// Exactly one child when the parent is selected.
    Alternative,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::And => "and",
            GroupKind::Or => "or",
            GroupKind::Alternative => "alternative",
        })
    }
}

/// A single attribute domain value.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Decimal(f64),
    Token(String),
}

impl Value {
    /// Parses a bare DSL token into a value. Returns `None` for tokens that are
    /// neither numbers nor identifiers.
    pub fn parse(text: &str) -> Option<Value> {
        if let Ok(i) = text.parse::<i64>() {
            return Some(Value::Int(i));
        }
        if text.contains('.') {
            if let Ok(d) = text.parse::<f64>() {
                if d.is_finite() {
                    return Some(Value::Decimal(d));
                }
            }
        }
        let mut chars = text.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        chars
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            .then(|| Value::Token(text.to_string()))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Decimal(d) => Some(*d),
            Value::Token(_) => None,
        }
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            Value::Token(t) => Some(t),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Decimal(_) => 1,
            Value::Token(_) => 2,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Int(i) => i.hash(state),
            Value::Decimal(d) => d.to_bits().hash(state),
            Value::Token(t) => t.hash(state),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Decimal(a), Value::Decimal(b)) => a.total_cmp(b),
            (Value::Token(a), Value::Token(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Decimal(d) => {
                let s = d.to_string();
                if s.contains('.') {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
            Value::Token(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub domain: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub cardinality: Cardinality,
    /// Decomposition of `children`.
    pub group: GroupKind,
    pub parent: Option<FeatureId>,
    pub children: Vec<FeatureId>,
    pub attributes: Vec<Attribute>,
}

impl Feature {
    pub fn is_multi(&self) -> bool {
        self.cardinality.is_multi()
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// An attributed, cardinality-based feature model stored as an arena rooted at
/// [`FeatureId::ROOT`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    pub features: Vec<Feature>,
    pub constraints: Vec<CrossConstraint>,
}

impl FeatureModel {
    pub fn root(&self) -> &Feature {
        &self.features[0]
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = FeatureId> {
        (0..self.features.len()).map(FeatureId)
    }

    /// Features from the root's child down to `id` (root excluded).
    pub fn path(&self, id: FeatureId) -> Vec<FeatureId> {
        let mut out = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            if c == FeatureId::ROOT {
                break;
            }
            out.push(c);
            cur = self.feature(c).parent;
        }
        out.reverse();
        out
    }

    /// Multi-features on the path to `id`, outermost first, `id` included.
    pub fn multi_levels(&self, id: FeatureId) -> Vec<FeatureId> {
        self.path(id)
            .into_iter()
            .filter(|f| self.feature(*f).is_multi())
            .collect()
    }

    /// Group kind the feature belongs to, i.e. its parent's decomposition.
    pub fn parent_group(&self, id: FeatureId) -> Option<GroupKind> {
        self.feature(id).parent.map(|p| self.feature(p).group)
    }

    pub fn child_named(&self, parent: FeatureId, name: &str) -> Option<FeatureId> {
        self.feature(parent)
            .children
            .iter()
            .copied()
            .find(|c| self.feature(*c).name == name)
    }

    /// All features whose name path ends with `names`.
    pub fn features_with_suffix(&self, names: &[&str]) -> Vec<FeatureId> {
        self.ids()
            .filter(|id| {
                let path = self.path(*id);
                path.len() >= names.len()
                    && path[path.len() - names.len()..]
                        .iter()
                        .zip(names)
                        .all(|(f, n)| self.feature(*f).name == *n)
            })
            .collect()
    }

    pub fn qualified_name(&self, id: FeatureId) -> String {
        if id == FeatureId::ROOT {
            return self.root().name.clone();
        }
        self.path(id)
            .iter()
            .map(|f| self.feature(*f).name.as_str())
            .collect::<Vec<_>>()
            .join("/")
    }
}
