//! Parser for the plain-text feature-model DSL.
//!
//! ```text
//! root Architecture {
//!   mandatory Input { }
//!   Block [1..5] {
//!     optional Extra { attr size in {1, 2}; }
//!     Kind { alternative { A { } B { } } }
//!   }
//! }
//! constraints {
//!   Block#2 requires Extra;
//!   A excludes B;
//!   Block requires Extra(size=2);
//!   !A | some(B);
//! }
//! ```

use thiserror::Error;

use super::constraint::{Aggregate, CrossConstraint, Expr, FeatureRef, RefSegment};
use super::model::{Attribute, Cardinality, Feature, FeatureId, FeatureModel, GroupKind, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unbounded cardinality `*` is not supported")]
    UnboundedCardinality,
    #[error("invalid cardinality [{min}..{max}]")]
    InvalidCardinality { min: u32, max: u32 },
    #[error("undefined reference `{0}`")]
    UndefinedReference(String),
    #[error("invalid instance index in `{0}`")]
    InvalidIndex(String),
    #[error("duplicate feature `{0}` among siblings")]
    DuplicateFeature(String),
    #[error("attribute `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("attribute `{0}` repeats a domain value")]
    DuplicateValue(String),
    #[error("feature `{0}`: {1}")]
    Structure(String, String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Comma,
    Eq,
    Hash,
    Slash,
    DotDot,
    Star,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (sl, sc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: sl, column: sc });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '#' => push(Tok::Hash, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '.' if chars.get(i + 1) == Some(&'.') => push(Tok::DotDot, 2, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Tok::DoubleArrow, 3, &mut i, &mut col)
            }
            c if c.is_ascii_digit()
                || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) =>
            {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Number(s), j - i, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Ident(s), j - i, &mut i, &mut col);
            }
            other => {
                return Err(ParseError {
                    line,
                    column: col,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                })
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "root", "mandatory", "optional", "alternative", "or", "attr", "in", "constraints", "requires",
    "excludes", "some", "one", "lone",
];

struct Parser<'m> {
    toks: Vec<Spanned>,
    pos: usize,
    features: Vec<Feature>,
    /// Set once the feature tree is complete; constraint references resolve against it.
    model: Option<&'m FeatureModel>,
}

type PResult<T> = Result<T, ParseError>;

impl<'m> Parser<'m> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, column: s.column, kind }
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[pos];
        ParseError { line: s.line, column: s.column, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(ParseErrorKind::Syntax(format!(
            "expected {expected}, found {}",
            self.peek().describe()
        )))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn number(&mut self) -> PResult<u32> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let v = s.parse::<u32>().map_err(|_| self.unexpected("a non-negative integer"))?;
                self.next();
                Ok(v)
            }
            _ => Err(self.unexpected("a non-negative integer")),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        let text = match self.peek().clone() {
            Tok::Number(s) | Tok::Ident(s) => s,
            _ => return Err(self.unexpected("a value")),
        };
        let v = Value::parse(&text).ok_or_else(|| self.unexpected("a value"))?;
        self.next();
        Ok(v)
    }

    fn cardinality(&mut self) -> PResult<Cardinality> {
        let start = self.pos;
        self.expect(Tok::LBracket, "`[`")?;
        let min = self.number()?;
        self.expect(Tok::DotDot, "`..`")?;
        if *self.peek() == Tok::Star {
            return Err(self.error_here(ParseErrorKind::UnboundedCardinality));
        }
        let max = self.number()?;
        self.expect(Tok::RBracket, "`]`")?;
        Cardinality::new(min, max)
            .ok_or_else(|| self.error_at(start, ParseErrorKind::InvalidCardinality { min, max }))
    }

    fn add_feature(&mut self, name: String, cardinality: Cardinality, parent: Option<FeatureId>) -> FeatureId {
        let id = FeatureId(self.features.len());
        self.features.push(Feature {
            name,
            cardinality,
            group: GroupKind::And,
            parent,
            children: Vec::new(),
            attributes: Vec::new(),
        });
        if let Some(p) = parent {
            self.features[p.0].children.push(id);
        }
        id
    }

    fn check_sibling(&self, parent: FeatureId, name: &str, at: usize) -> PResult<()> {
        if self.features[parent.0].children.iter().any(|c| self.features[c.0].name == name) {
            return Err(self.error_at(at, ParseErrorKind::DuplicateFeature(name.to_string())));
        }
        Ok(())
    }

    /// Parses `{ body }` for feature `id`.
    fn body(&mut self, id: FeatureId) -> PResult<()> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut has_solitary = false;
        let mut has_group = false;
        loop {
            let at = self.pos;
            if *self.peek() == Tok::RBrace {
                self.next();
                break;
            }
            if self.is_keyword("attr") {
                self.next();
                let name = self.name()?;
                if !self.is_keyword("in") {
                    return Err(self.unexpected("`in`"));
                }
                self.next();
                self.expect(Tok::LBrace, "`{`")?;
                let mut domain = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        let v = self.value()?;
                        if domain.contains(&v) {
                            return Err(self.error_at(at, ParseErrorKind::DuplicateValue(name)));
                        }
                        domain.push(v);
                        if *self.peek() == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace, "`}`")?;
                self.expect(Tok::Semi, "`;`")?;
                if domain.is_empty() {
                    return Err(self.error_at(at, ParseErrorKind::EmptyDomain(name)));
                }
                self.features[id.0].attributes.push(Attribute { name, domain });
                continue;
            }
            if self.is_keyword("alternative") || self.is_keyword("or") {
                let kind = if self.is_keyword("or") { GroupKind::Or } else { GroupKind::Alternative };
                let fname = self.features[id.0].name.clone();
                if has_solitary || has_group {
                    return Err(self.error_here(ParseErrorKind::Structure(
                        fname,
                        "a feature has either solitary children or one group".into(),
                    )));
                }
                has_group = true;
                self.next();
                self.features[id.0].group = kind;
                self.expect(Tok::LBrace, "`{`")?;
                while *self.peek() != Tok::RBrace {
                    let at = self.pos;
                    if *self.peek_at(1) == Tok::LBracket
                        || self.is_keyword("mandatory")
                        || self.is_keyword("optional")
                    {
                        return Err(self.error_here(ParseErrorKind::Structure(
                            fname.clone(),
                            "group members cannot carry a cardinality".into(),
                        )));
                    }
                    let name = self.name()?;
                    self.check_sibling(id, &name, at)?;
                    let child = self.add_feature(name, Cardinality::OPTIONAL, Some(id));
                    self.body(child)?;
                }
                self.next();
                continue;
            }
            // solitary child
            let keyword = if self.is_keyword("mandatory") {
                self.next();
                Some(true)
            } else if self.is_keyword("optional") {
                self.next();
                Some(false)
            } else {
                None
            };
            let name_at = self.pos;
            let name = self.name()?;
            let card = if *self.peek() == Tok::LBracket {
                let card_at = self.pos;
                let card = self.cardinality()?;
                match keyword {
                    Some(true) if card.min == 0 => {
                        return Err(self.error_at(card_at, ParseErrorKind::Structure(
                            name,
                            "mandatory feature with minimum 0".into(),
                        )))
                    }
                    Some(false) if card.min > 0 => {
                        return Err(self.error_at(card_at, ParseErrorKind::Structure(
                            name,
                            "optional feature with positive minimum".into(),
                        )))
                    }
                    _ => card,
                }
            } else if keyword == Some(false) {
                Cardinality::OPTIONAL
            } else {
                Cardinality::MANDATORY
            };
            if has_group {
                return Err(self.error_at(name_at, ParseErrorKind::Structure(
                    self.features[id.0].name.clone(),
                    "a feature has either solitary children or one group".into(),
                )));
            }
            has_solitary = true;
            self.check_sibling(id, &name, name_at)?;
            let child = self.add_feature(name, card, Some(id));
            self.body(child)?;
        }
        Ok(())
    }

    fn constraints_block(&mut self) -> PResult<Vec<CrossConstraint>> {
        self.expect(Tok::LBrace, "`{`")?;
        let out = self.constraint_list(Tok::RBrace)?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(out)
    }

    fn constraint_list(&mut self, end: Tok) -> PResult<Vec<CrossConstraint>> {
        let mut out = Vec::new();
        while *self.peek() != end {
            out.push(self.constraint()?);
            self.expect(Tok::Semi, "`;`")?;
        }
        Ok(out)
    }

    fn constraint(&mut self) -> PResult<CrossConstraint> {
        let lhs = self.expr()?;
        if self.is_keyword("requires") || self.is_keyword("excludes") {
            let requires = self.is_keyword("requires");
            let Expr::Ref(a) = lhs else {
                return Err(self.error_here(ParseErrorKind::Syntax(
                    "`requires`/`excludes` take a feature reference on the left".into(),
                )));
            };
            self.next();
            let b = self.feature_ref()?;
            return Ok(if requires {
                CrossConstraint::requires(a, b)
            } else {
                CrossConstraint::excludes(a, b)
            });
        }
        Ok(CrossConstraint::propositional(lhs))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::DoubleArrow {
            self.next();
            let rhs = self.implication()?;
            lhs = Expr::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Expr> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let rhs = self.implication()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Expr> {
        let mut items = vec![self.conjunction()?];
        while *self.peek() == Tok::Pipe {
            self.next();
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn conjunction(&mut self) -> PResult<Expr> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::Amp {
            self.next();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Bang => {
                self.next();
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) if (s == "some" || s == "one" || s == "lone") && *self.peek_at(1) == Tok::LParen => {
                let agg = match s.as_str() {
                    "some" => Aggregate::Some,
                    "one" => Aggregate::One,
                    _ => Aggregate::Lone,
                };
                self.next();
                self.next();
                let r = self.feature_ref()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Count(agg, r))
            }
            _ => Ok(Expr::Ref(self.feature_ref()?)),
        }
    }

    fn feature_ref(&mut self) -> PResult<FeatureRef> {
        let start = self.pos;
        let mut segments = Vec::new();
        loop {
            let name = self.name()?;
            let index = if *self.peek() == Tok::Hash {
                self.next();
                Some(self.number()?)
            } else {
                None
            };
            segments.push(RefSegment { name, index });
            if *self.peek() == Tok::Slash {
                self.next();
            } else {
                break;
            }
        }
        let mut bindings = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                let attr = self.name()?;
                self.expect(Tok::Eq, "`=`")?;
                let v = self.value()?;
                bindings.push((attr, v));
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        let mut r = FeatureRef { segments, bindings, targets: Vec::new() };
        if let Some(model) = self.model {
            resolve_ref(model, &mut r).map_err(|kind| self.error_at(start, kind))?;
        }
        Ok(r)
    }
}

/// Resolves the targets of a reference against a model.
pub(crate) fn resolve_ref(model: &FeatureModel, r: &mut FeatureRef) -> Result<(), ParseErrorKind> {
    let names: Vec<&str> = r.segments.iter().map(|s| s.name.as_str()).collect();
    let targets = model.features_with_suffix(&names);
    let text = r.to_string();
    if targets.is_empty() {
        return Err(ParseErrorKind::UndefinedReference(text));
    }
    for &t in &targets {
        let path = model.path(t);
        let offset = path.len() - r.segments.len();
        for (i, seg) in r.segments.iter().enumerate() {
            if let Some(k) = seg.index {
                let card = model.feature(path[offset + i]).cardinality;
                if !card.is_multi() || k == 0 || k > card.max {
                    return Err(ParseErrorKind::InvalidIndex(text));
                }
            }
        }
        for (attr, v) in &r.bindings {
            match model.feature(t).attribute(attr) {
                Some(a) if a.domain.contains(v) => {}
                _ => return Err(ParseErrorKind::UndefinedReference(format!("{text}: {attr}={v}"))),
            }
        }
    }
    r.targets = targets;
    Ok(())
}

/// Parses a complete feature-model document.
pub fn parse_fm(text: &str) -> Result<FeatureModel, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, features: Vec::new(), model: None };
    if !p.is_keyword("root") {
        return Err(p.unexpected("`root`"));
    }
    p.next();
    let name = p.name()?;
    let root = p.add_feature(name, Cardinality::MANDATORY, None);
    p.body(root)?;
    let has_constraints = p.is_keyword("constraints");
    let features = std::mem::take(&mut p.features);
    let mut model = FeatureModel { features, constraints: Vec::new() };
    if has_constraints {
        p.next();
        let toks = std::mem::take(&mut p.toks);
        let mut cp = Parser { toks, pos: p.pos, features: Vec::new(), model: Some(&model) };
        let constraints = cp.constraints_block()?;
        if *cp.peek() != Tok::Eof {
            return Err(cp.unexpected("end of input"));
        }
        model.constraints = constraints;
    } else if *p.peek() != Tok::Eof {
        return Err(p.unexpected("`constraints` or end of input"));
    }
    Ok(model)
}

/// Parses a list of `constraint;` items against an existing model.
pub fn parse_constraints(model: &FeatureModel, text: &str) -> Result<Vec<CrossConstraint>, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, features: Vec::new(), model: Some(model) };
    p.constraint_list(Tok::Eof)
}

impl FeatureModel {
    /// Returns a copy of the model with extra constraints appended.
    pub fn with_overlay(&self, constraints_text: &str) -> Result<FeatureModel, ParseError> {
        let extra = parse_constraints(self, constraints_text)?;
        let mut m = self.clone();
        m.constraints.extend(extra);
        Ok(m)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::constraint::ConstraintKind;

    #[test]
    fn minimal_root() {
        let m = parse_fm("root R { }").unwrap();
        assert_eq!(m.features.len(), 1);
        assert_eq!(m.root().name, "R");
        assert_eq!(m.root().cardinality, Cardinality::MANDATORY);
        assert!(m.constraints.is_empty());
    }

    #[test]
    fn multi_feature_cardinality() {
        let m = parse_fm("root R { Block [1..5] { } }").unwrap();
        let b = m.feature(m.root().children[0]);
        assert_eq!(b.name, "Block");
        assert_eq!(b.cardinality, Cardinality { min: 1, max: 5 });
        assert!(b.is_multi());
    }

    #[test]
    fn inverted_cardinality_is_rejected() {
        let err = parse_fm("root R { Block [5..2] { } }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::InvalidCardinality { min: 5, max: 2 });
        assert_eq!((err.line, err.column), (1, 16));
    }

    #[test]
    fn unbounded_cardinality_is_rejected() {
        let err = parse_fm("root R { Block [0..*] { } }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnboundedCardinality);
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_fm("root R {\n  mandatory A {\n  }\n  attr x in {1, 2}\n}").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(err.line, 5);
    }

    #[test]
    fn undefined_reference() {
        let err = parse_fm("root R { optional A { } } constraints { A requires B; }").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndefinedReference("B".into()));
    }

    #[test]
    fn index_on_single_feature_is_rejected() {
        let err = parse_fm("root R { optional A { } } constraints { A#1; }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::InvalidIndex(_)));
        let err = parse_fm("root R { A [0..3] { } } constraints { A#4; }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::InvalidIndex(_)));
    }

    #[test]
    fn constraint_forms() {
        let m = parse_fm(
            "root R {
               optional A { }
               optional B { attr k in {1, 3, 5}; attr act in {relu, tanh}; }
               C [0..3] { }
             }
             constraints {
               A requires B;
               A excludes C;
               A requires B(k=3, act=relu);
               !A | some(C) -> one(C#2) <-> B;
             }",
        )
        .unwrap();
        let kinds: Vec<_> = m.constraints.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ConstraintKind::Requires,
                ConstraintKind::Excludes,
                ConstraintKind::RequiresWithAttributes,
                ConstraintKind::Propositional
            ]
        );
        assert_eq!(m.constraints[2].to_string(), "A requires B(k=3, act=relu)");
    }

    #[test]
    fn binding_outside_domain_is_undefined() {
        let err = parse_fm("root R { optional B { attr k in {1, 3}; } } constraints { B(k=2); }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UndefinedReference(_)));
    }

    #[test]
    fn duplicate_siblings_and_values() {
        assert!(matches!(
            parse_fm("root R { A { } A { } }").unwrap_err().kind,
            ParseErrorKind::DuplicateFeature(_)
        ));
        assert!(matches!(
            parse_fm("root R { attr x in {1, 1}; }").unwrap_err().kind,
            ParseErrorKind::DuplicateValue(_)
        ));
        assert!(matches!(
            parse_fm("root R { attr x in {}; }").unwrap_err().kind,
            ParseErrorKind::EmptyDomain(_)
        ));
    }

    #[test]
    fn mixing_group_and_solitary_children_is_rejected() {
        let err = parse_fm("root R { A { } alternative { X { } Y { } } }").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Structure(..)));
    }

    #[test]
    fn overlay_constraints_resolve_against_model() {
        let m = parse_fm("root R { optional A { } optional B { } }").unwrap();
        let m2 = m.with_overlay("!A; A | B;").unwrap();
        assert_eq!(m2.constraints.len(), 2);
        assert!(m.with_overlay("Z;").is_err());
    }
}
