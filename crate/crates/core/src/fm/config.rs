use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::model::{FeatureId, FeatureModel, Value};

/// One step of an instance path: a feature name plus the instance index when
/// the feature is a multi-feature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub name: String,
    pub index: Option<u32>,
}

impl Segment {
    pub fn single(name: impl Into<String>) -> Self {
        Segment { name: name.into(), index: None }
    }

    pub fn indexed(name: impl Into<String>, index: u32) -> Self {
        Segment { name: name.into(), index: Some(index) }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(k) => write!(f, "{}#{}", self.name, k),
            None => f.write_str(&self.name),
        }
    }
}

/// Path of a feature instance below the root, e.g. `Block#2/Cell#1/Input1/Convolution`.
/// The empty path denotes the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InstancePath(pub Vec<Segment>);

impl InstancePath {
    pub fn root() -> Self {
        InstancePath(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<InstancePath> {
        if self.0.is_empty() {
            None
        } else {
            Some(InstancePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, seg: Segment) -> InstancePath {
        let mut v = self.0.clone();
        v.push(seg);
        InstancePath(v)
    }

    pub fn last(&self) -> Option<&Segment> {
        self.0.last()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }
}

impl fmt::Display for InstancePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid instance path `{0}`")]
pub struct PathSyntaxError(pub String);

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for Segment {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PathSyntaxError(s.to_string());
        match s.split_once('#') {
            Some((name, idx)) => {
                let index: u32 = idx.parse().map_err(|_| err())?;
                if !is_identifier(name) {
                    return Err(err());
                }
                Ok(Segment::indexed(name, index))
            }
            None if is_identifier(s) => Ok(Segment::single(s)),
            None => Err(err()),
        }
    }
}

impl FromStr for InstancePath {
    type Err = PathSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(InstancePath::root());
        }
        s.split('/')
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(InstancePath)
            .map_err(|_| PathSyntaxError(s.to_string()))
    }
}

/// Attribute of a particular feature instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrKey {
    pub owner: InstancePath,
    pub attr: String,
}

impl fmt::Display for AttrKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.owner, self.attr)
    }
}

/// A selection of feature instances together with one value per attribute of
/// every selected instance. The root is implicitly selected and never listed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub selections: BTreeSet<InstancePath>,
    pub bindings: BTreeMap<AttrKey, Value>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_selected(&self, path: &InstancePath) -> bool {
        path.is_root() || self.selections.contains(path)
    }

    pub fn binding(&self, owner: &InstancePath, attr: &str) -> Option<&Value> {
        self.bindings.get(&AttrKey { owner: owner.clone(), attr: attr.to_string() })
    }

    /// Bindings of one instance, in attribute-name order.
    pub fn bindings_of<'a>(
        &'a self,
        owner: &'a InstancePath,
    ) -> impl Iterator<Item = (&'a str, &'a Value)> + 'a {
        self.bindings
            .iter()
            .filter(move |(k, _)| &k.owner == owner)
            .map(|(k, v)| (k.attr.as_str(), v))
    }

    /// Canonical `.fncfg` text: one instance per line in path order, bindings
    /// in braces sorted by attribute name.
    pub fn to_fncfg(&self) -> String {
        let mut out = String::new();
        self.write_fncfg(&mut out);
        out
    }

    fn write_fncfg(&self, out: &mut String) {
        use std::fmt::Write;
        let mut by_owner: BTreeMap<&InstancePath, Vec<(&str, &Value)>> = BTreeMap::new();
        for (k, v) in &self.bindings {
            by_owner.entry(&k.owner).or_default().push((&k.attr, v));
        }
        let mut lines: BTreeSet<&InstancePath> = self.selections.iter().collect();
        lines.extend(by_owner.keys().copied());
        for path in lines {
            if path.is_root() {
                out.push('.');
            } else {
                let _ = write!(out, "{path}");
            }
            if let Some(bs) = by_owner.get(path) {
                out.push_str(" {");
                for (i, (a, v)) in bs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{a}={v}");
                }
                out.push('}');
            }
            out.push('\n');
        }
    }

    /// Parses `.fncfg` text. Lines starting with `#` are comments. A line
    /// consisting of `.` addresses the root (only useful for root attributes).
    pub fn parse_fncfg(text: &str) -> Result<Configuration, ConfigParseError> {
        let mut cfg = Configuration::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ConfigParseError { line: lineno + 1, message: msg.to_string() };
            let (path_text, rest) = match line.find('{') {
                Some(i) => (line[..i].trim(), Some(&line[i..])),
                None => (line, None),
            };
            let path: InstancePath = if path_text == "." {
                InstancePath::root()
            } else {
                path_text.parse().map_err(|e: PathSyntaxError| err(&e.to_string()))?
            };
            if !path.is_root() {
                cfg.selections.insert(path.clone());
            }
            if let Some(rest) = rest {
                let inner = rest
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| err("unterminated attribute bindings"))?;
                for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (name, value) =
                        item.split_once('=').ok_or_else(|| err("expected attr=value"))?;
                    let name = name.trim();
                    if !is_identifier(name) {
                        return Err(err(&format!("invalid attribute name `{name}`")));
                    }
                    let value = Value::parse(value.trim())
                        .ok_or_else(|| err(&format!("invalid value `{}`", value.trim())))?;
                    let key = AttrKey { owner: path.clone(), attr: name.to_string() };
                    if cfg.bindings.insert(key, value).is_some() {
                        return Err(err(&format!("attribute `{name}` bound twice")));
                    }
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("configuration line {line}: {message}")]
pub struct ConfigParseError {
    pub line: usize,
    pub message: String,
}

/// An instance path that cannot be interpreted against a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("unknown instance path `{0}`")]
    Unknown(InstancePath),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(AttrKey),
    #[error("value `{value}` is not in the domain of `{key}`")]
    UnknownValue { key: AttrKey, value: Value },
}

/// A path resolved to its feature and the instance index of each multi-level
/// on the way (outermost first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedPath {
    pub feature: FeatureId,
    pub indices: Vec<(FeatureId, u32)>,
}

impl FeatureModel {
    /// Resolves an instance path. Indices larger than the declared maximum are
    /// accepted here (they are cardinality violations, not unknown paths).
    pub fn resolve(&self, path: &InstancePath) -> Result<ResolvedPath, PathError> {
        let mut cur = FeatureId::ROOT;
        let mut indices = Vec::new();
        for seg in path.segments() {
            let child = self
                .child_named(cur, &seg.name)
                .ok_or_else(|| PathError::Unknown(path.clone()))?;
            let f = self.feature(child);
            match (f.is_multi(), seg.index) {
                (true, Some(k)) if k >= 1 => indices.push((child, k)),
                (false, None) => {}
                _ => return Err(PathError::Unknown(path.clone())),
            }
            cur = child;
        }
        Ok(ResolvedPath { feature: cur, indices })
    }

    /// Builds the instance path of `feature` using `index_of` for every
    /// multi-level on the way.
    pub fn instance_path(
        &self,
        feature: FeatureId,
        mut index_of: impl FnMut(FeatureId) -> u32,
    ) -> InstancePath {
        InstancePath(
            self.path(feature)
                .into_iter()
                .map(|id| {
                    let f = self.feature(id);
                    if f.is_multi() {
                        Segment::indexed(f.name.clone(), index_of(id))
                    } else {
                        Segment::single(f.name.clone())
                    }
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_round_trip() {
        let p: InstancePath = "Block#2/Cell#1/Input1/Convolution".parse().unwrap();
        assert_eq!(p.0.len(), 4);
        assert_eq!(p.0[0], Segment::indexed("Block", 2));
        assert_eq!(p.to_string(), "Block#2/Cell#1/Input1/Convolution");
        assert!("Block#x".parse::<InstancePath>().is_err());
        assert!("a//b".parse::<InstancePath>().is_err());
    }

    #[test]
    fn indices_order_numerically() {
        let a: InstancePath = "Block#2".parse().unwrap();
        let b: InstancePath = "Block#10".parse().unwrap();
        assert!(a < b);
    }

    #[test]
    fn fncfg_round_trip() {
        let text = "# comment\nBlock#1\nBlock#1/Cell#1/Input1/Convolution {kernel=3, activation=relu}\nBlock#1/Cell#1/Operation1/Dropout {rate=0.5}\n";
        let cfg = Configuration::parse_fncfg(text).unwrap();
        assert_eq!(cfg.selections.len(), 3);
        assert_eq!(cfg.bindings.len(), 3);
        let again = Configuration::parse_fncfg(&cfg.to_fncfg()).unwrap();
        assert_eq!(cfg, again);
        assert!(cfg.to_fncfg().contains("{activation=relu, kernel=3}"));
        assert!(cfg.to_fncfg().contains("{rate=0.5}"));
    }

    #[test]
    fn fncfg_rejects_duplicate_binding() {
        let err = Configuration::parse_fncfg("A {x=1, x=2}").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn decimal_values_keep_their_kind() {
        let v = Value::parse("1.0").unwrap();
        assert_eq!(v.to_string(), "1.0");
        assert_eq!(Value::parse(&v.to_string()), Some(v));
        assert_ne!(Value::parse("1"), Value::parse("1.0"));
    }
}
