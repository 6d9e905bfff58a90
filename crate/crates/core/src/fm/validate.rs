//! Model-level diagnostics: structural problems, unsatisfiability with a
//! minimal set of responsible constraints, and dead features.

use std::collections::BTreeSet;
use std::fmt;

use super::model::{FeatureId, FeatureModel, GroupKind};
use crate::flatten::{flatten, to_cnf, FlattenBounds, FlattenError, Provenance};
use crate::sat::{SolveResult, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticKind {
    DuplicateAttribute,
    GroupArity,
    UnsatisfiableModel,
    UnsatisfiableConstraints,
    DeadFeature,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::DuplicateAttribute => "duplicate attribute",
            DiagnosticKind::GroupArity => "group arity",
            DiagnosticKind::UnsatisfiableModel => "unsatisfiable model",
            DiagnosticKind::UnsatisfiableConstraints => "unsatisfiable constraints",
            DiagnosticKind::DeadFeature => "dead feature",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    /// Indices into `model.constraints` involved in the finding.
    pub constraints: Vec<usize>,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, message: String) -> Self {
        Diagnostic { kind, message, constraints: Vec::new() }
    }

    /// Group-arity findings are warnings; everything else makes the model unusable.
    pub fn is_error(&self) -> bool {
        self.kind != DiagnosticKind::GroupArity
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

fn satisfiable(model: &FeatureModel, keep: &[usize]) -> bool {
    let mut m = model.clone();
    m.constraints = keep.iter().map(|&i| model.constraints[i].clone()).collect();
    let Ok(bm) = flatten(&m, &FlattenBounds::declared()) else {
        return false;
    };
    matches!(Solver::new(&to_cnf(&bm), 0).solve(), SolveResult::Sat(_))
}

/// Runs every model-level check and returns the findings (empty when the
/// model is usable).
pub fn validate_model(model: &FeatureModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for id in model.ids() {
        let f = model.feature(id);
        if f.group != GroupKind::And && f.children.len() < 2 {
            out.push(Diagnostic::new(
                DiagnosticKind::GroupArity,
                format!("{} group of `{}` has {} member(s)", f.group, model.qualified_name(id), f.children.len()),
            ));
        }
    }

    let bm = match flatten(model, &FlattenBounds::declared()) {
        Ok(bm) => bm,
        Err(FlattenError::DuplicateAttribute { feature, attr }) => {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateAttribute,
                format!("`{feature}` declares attribute `{attr}` more than once"),
            ));
            return out;
        }
        Err(e) => {
            out.push(Diagnostic::new(DiagnosticKind::UnsatisfiableModel, e.to_string()));
            return out;
        }
    };
    let cnf = to_cnf(&bm);
    let mut solver = Solver::new(&cnf, 0);
    let first = match solver.solve() {
        SolveResult::Sat(m) => m,
        _ => {
            // Deletion-based shrinking to a minimal responsible subset.
            let mut keep: Vec<usize> = (0..model.constraints.len()).collect();
            let mut i = 0;
            while i < keep.len() {
                let mut without = keep.clone();
                without.remove(i);
                if satisfiable(model, &without) {
                    i += 1;
                } else {
                    keep = without;
                }
            }
            if keep.is_empty() {
                out.push(Diagnostic::new(
                    DiagnosticKind::UnsatisfiableModel,
                    "the feature tree admits no configuration".into(),
                ));
            } else {
                let listed: Vec<String> =
                    keep.iter().map(|&i| format!("`{}`", model.constraints[i])).collect();
                let mut d = Diagnostic::new(
                    DiagnosticKind::UnsatisfiableConstraints,
                    format!("no configuration satisfies {} together", listed.join(" and ")),
                );
                d.constraints = keep;
                out.push(d);
            }
            return out;
        }
    };

    let feature_of: Vec<Option<FeatureId>> = bm
        .variables
        .iter()
        .map(|v| match &v.provenance {
            Provenance::Instance(p) => model.resolve(p).ok().map(|r| r.feature),
            Provenance::AttributeValue { .. } => None,
        })
        .collect();
    let mut alive: BTreeSet<FeatureId> = BTreeSet::new();
    let mark = |alive: &mut BTreeSet<FeatureId>, m: &[bool]| {
        for (v, f) in feature_of.iter().enumerate() {
            if let (true, Some(f)) = (m[v], f) {
                alive.insert(*f);
            }
        }
    };
    mark(&mut alive, &first);
    for id in model.ids().skip(1) {
        if alive.contains(&id) {
            continue;
        }
        for (v, f) in feature_of.iter().enumerate() {
            if *f != Some(id) {
                continue;
            }
            if let SolveResult::Sat(m) = solver.solve_with_assumptions(&[(v + 1) as i32]) {
                mark(&mut alive, &m);
                break;
            }
        }
        if !alive.contains(&id) {
            out.push(Diagnostic::new(
                DiagnosticKind::DeadFeature,
                format!("`{}` appears in no valid configuration", model.qualified_name(id)),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fm::parse_fm;

    #[test]
    fn clean_model() {
        let m = parse_fm("root R { optional A { } optional B { } } constraints { A requires B; }").unwrap();
        assert!(validate_model(&m).is_empty());
    }

    #[test]
    fn conflicting_pair_is_reported() {
        let m = parse_fm(
            "root R { mandatory A { } optional B { } optional C { } }
             constraints { C requires B; A requires B; A excludes B; }",
        )
        .unwrap();
        let d = validate_model(&m);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, DiagnosticKind::UnsatisfiableConstraints);
        assert_eq!(d[0].constraints, vec![1, 2]);
    }

    #[test]
    fn dead_feature() {
        let m = parse_fm("root R { mandatory A { } optional B { } } constraints { A excludes B; }").unwrap();
        let d = validate_model(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::DeadFeature);
        assert!(d[0].message.contains("`B`"));
    }

    #[test]
    fn single_member_group_warns() {
        let m = parse_fm("root R { alternative { A { } } }").unwrap();
        let d = validate_model(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::GroupArity);
        assert!(!d[0].is_error());
    }
}
