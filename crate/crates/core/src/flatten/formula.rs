use std::fmt;

/// Propositional formula over Boolean-model variables (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Const(bool),
    Var(usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ExactlyOne(Vec<Formula>),
    AtMostOne(Vec<Formula>),
}

impl Formula {
    pub fn var(v: usize) -> Formula {
        Formula::Var(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Var(v) => assignment[*v],
            Formula::Not(f) => !f.eval(assignment),
            Formula::And(fs) => fs.iter().all(|f| f.eval(assignment)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(assignment)),
            Formula::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
            Formula::Iff(a, b) => a.eval(assignment) == b.eval(assignment),
            Formula::ExactlyOne(fs) => fs.iter().filter(|f| f.eval(assignment)).count() == 1,
            Formula::AtMostOne(fs) => fs.iter().filter(|f| f.eval(assignment)).count() <= 1,
        }
    }

    /// Rewrites cardinality nodes into plain connectives.
    pub(crate) fn expand_cardinality(&self) -> Formula {
        let pairs = |fs: &[Formula]| {
            let mut out = Vec::new();
            for i in 0..fs.len() {
                for j in i + 1..fs.len() {
                    out.push(Formula::not(Formula::And(vec![fs[i].clone(), fs[j].clone()])));
                }
            }
            Formula::And(out)
        };
        match self {
            Formula::ExactlyOne(fs) => Formula::And(vec![Formula::Or(fs.clone()), pairs(fs)]),
            Formula::AtMostOne(fs) => pairs(fs),
            other => other.clone(),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Formula::Const(_) => None,
            Formula::Var(v) => Some(*v),
            Formula::Not(f) => f.max_var(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.max_var().max(b.max_var()),
            Formula::And(fs) | Formula::Or(fs) | Formula::ExactlyOne(fs) | Formula::AtMostOne(fs) => {
                fs.iter().filter_map(Formula::max_var).max()
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, fs: &[Formula]| {
            write!(f, "{name}(")?;
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Var(v) => write!(f, "x{v}"),
            Formula::Not(x) => write!(f, "!{x}"),
            Formula::And(fs) => list(f, "and", fs),
            Formula::Or(fs) => list(f, "or", fs),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Formula::ExactlyOne(fs) => list(f, "one", fs),
            Formula::AtMostOne(fs) => list(f, "lone", fs),
        }
    }
}
