//! Definitional CNF conversion.
//!
//! Top-level structure (conjunctions, clauses, guarded implications,
//! exactly-one groups over literals) is emitted directly. Any remaining nested
//! subformula gets an auxiliary variable defined by full equivalence, so every
//! auxiliary is functionally determined by the provenance variables and model
//! counts are preserved.

use super::formula::Formula;
use super::BooleanModel;

/// DIMACS-style literal: `v` or `-v` for the 1-based variable `v`.
pub type Lit = i32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// Variables `1..=provenance_vars` mirror the Boolean model; the rest are internal.
    pub provenance_vars: usize,
}

impl CnfFormula {
    pub fn is_internal(&self, var: usize) -> bool {
        var > self.provenance_vars
    }

    /// `assignment[i]` is the value of variable `i + 1`.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| lit_value(l, assignment)))
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Vec::is_empty)
    }
}

pub(crate) fn lit_value(l: Lit, assignment: &[bool]) -> bool {
    let v = assignment[l.unsigned_abs() as usize - 1];
    if l > 0 { v } else { !v }
}

struct Encoder {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

fn lit(v: usize, positive: bool) -> Lit {
    let l = (v + 1) as Lit;
    if positive { l } else { -l }
}

impl Encoder {
    fn fresh(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    fn add_clause(&mut self, mut clause: Vec<Lit>) {
        clause.sort_by_key(|l| (l.abs(), *l));
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == -w[1]) {
            return;
        }
        self.clauses.push(clause);
    }

    fn with_guard(guard: &[Lit], body: &[Lit]) -> Vec<Lit> {
        guard.iter().chain(body).copied().collect()
    }

    /// Emits clauses for `guard ∨ (f == positive)`.
    fn assert(&mut self, f: &Formula, positive: bool, guard: &[Lit]) {
        match (f, positive) {
            (Formula::Const(b), p) => {
                if *b != p {
                    self.add_clause(guard.to_vec());
                }
            }
            (Formula::Var(v), p) => self.add_clause(Self::with_guard(guard, &[lit(*v, p)])),
            (Formula::Not(g), p) => self.assert(g, !p, guard),
            (Formula::And(gs), true) | (Formula::Or(gs), false) => {
                for g in gs {
                    self.assert(g, positive, guard);
                }
            }
            (Formula::Implies(a, b), true) => {
                let mut g2 = guard.to_vec();
                if self.disjuncts(a, false, &mut g2) {
                    self.assert(b, true, &g2);
                }
            }
            (Formula::Implies(a, b), false) => {
                self.assert(a, true, guard);
                self.assert(b, false, guard);
            }
            (Formula::Iff(a, b), true) => {
                let la = self.literal(a, true);
                let lb = self.literal(b, true);
                self.add_clause(Self::with_guard(guard, &[-la, lb]));
                self.add_clause(Self::with_guard(guard, &[la, -lb]));
            }
            (Formula::Iff(a, b), false) => {
                let la = self.literal(a, true);
                let lb = self.literal(b, true);
                self.add_clause(Self::with_guard(guard, &[la, lb]));
                self.add_clause(Self::with_guard(guard, &[-la, -lb]));
            }
            (Formula::ExactlyOne(gs), true) | (Formula::AtMostOne(gs), true) => {
                let lits: Vec<Lit> = gs.iter().map(|g| self.literal(g, true)).collect();
                if matches!(f, Formula::ExactlyOne(_)) {
                    self.add_clause(Self::with_guard(guard, &lits));
                }
                for i in 0..lits.len() {
                    for j in i + 1..lits.len() {
                        self.add_clause(Self::with_guard(guard, &[-lits[i], -lits[j]]));
                    }
                }
            }
            _ => {
                let mut clause = guard.to_vec();
                if self.disjuncts(f, positive, &mut clause) {
                    self.add_clause(clause);
                }
            }
        }
    }

    /// Appends literals whose disjunction is equivalent to `f == positive`.
    /// Returns `false` when the disjunction is trivially true.
    fn disjuncts(&mut self, f: &Formula, positive: bool, out: &mut Vec<Lit>) -> bool {
        match (f, positive) {
            (Formula::Const(b), p) => *b != p,
            (Formula::Var(v), p) => {
                out.push(lit(*v, p));
                true
            }
            (Formula::Not(g), p) => self.disjuncts(g, !p, out),
            (Formula::Or(gs), true) | (Formula::And(gs), false) => {
                gs.iter().all(|g| self.disjuncts(g, positive, out))
            }
            (Formula::Implies(a, b), true) => self.disjuncts(a, false, out) && self.disjuncts(b, true, out),
            _ => {
                let l = self.literal(f, positive);
                out.push(l);
                true
            }
        }
    }

    /// Literal equivalent to `f == positive`, defining auxiliaries as needed.
    fn literal(&mut self, f: &Formula, positive: bool) -> Lit {
        let t = match f {
            Formula::Var(v) => return lit(*v, positive),
            Formula::Not(g) => return self.literal(g, !positive),
            Formula::Const(b) => {
                let t = self.fresh();
                self.add_clause(vec![if *b { t } else { -t }]);
                t
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.literal(g, true)).collect();
                let t = self.fresh();
                if matches!(f, Formula::And(_)) {
                    for &l in &ls {
                        self.add_clause(vec![-t, l]);
                    }
                    let mut back: Vec<Lit> = ls.iter().map(|l| -l).collect();
                    back.push(t);
                    self.add_clause(back);
                } else {
                    for &l in &ls {
                        self.add_clause(vec![t, -l]);
                    }
                    let mut fwd = ls;
                    fwd.push(-t);
                    self.add_clause(fwd);
                }
                t
            }
            Formula::Implies(a, b) => {
                let la = self.literal(a, true);
                let lb = self.literal(b, true);
                let t = self.fresh();
                self.add_clause(vec![-t, -la, lb]);
                self.add_clause(vec![t, la]);
                self.add_clause(vec![t, -lb]);
                t
            }
            Formula::Iff(a, b) => {
                let la = self.literal(a, true);
                let lb = self.literal(b, true);
                let t = self.fresh();
                self.add_clause(vec![-t, -la, lb]);
                self.add_clause(vec![-t, la, -lb]);
                self.add_clause(vec![t, la, lb]);
                self.add_clause(vec![t, -la, -lb]);
                t
            }
            Formula::ExactlyOne(_) | Formula::AtMostOne(_) => {
                return self.literal(&f.expand_cardinality(), positive)
            }
        };
        if positive { t } else { -t }
    }
}

/// Converts the Boolean model's constraints into an equisatisfiable CNF whose
/// first variables are the model's variables in order.
pub fn to_cnf(bm: &BooleanModel) -> CnfFormula {
    formulas_to_cnf(bm.variables.len(), &bm.constraints)
}

/// CNF conversion for an arbitrary constraint list over `num_vars` variables.
pub fn formulas_to_cnf(num_vars: usize, constraints: &[Formula]) -> CnfFormula {
    let mut enc = Encoder { num_vars, clauses: Vec::new() };
    for c in constraints {
        enc.assert(c, true, &[]);
    }
    CnfFormula { num_vars: enc.num_vars, clauses: enc.clauses, provenance_vars: num_vars }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Formula {
        Formula::Var(i)
    }

    fn normalized(cnf: &CnfFormula) -> Vec<Vec<Lit>> {
        let mut out: Vec<Vec<Lit>> = cnf
            .clauses
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn iff_gives_two_clauses() {
        let cnf = formulas_to_cnf(2, &[Formula::iff(v(0), v(1))]);
        assert_eq!(cnf.num_vars, 2);
        assert_eq!(normalized(&cnf), vec![vec![-2, 1], vec![-1, 2]]);
    }

    #[test]
    fn exactly_one_is_alo_plus_pairwise() {
        let cnf = formulas_to_cnf(3, &[Formula::ExactlyOne(vec![v(0), v(1), v(2)])]);
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(normalized(&cnf), vec![vec![-3, -2], vec![-3, -1], vec![-2, -1], vec![1, 2, 3]]);
    }

    #[test]
    fn guarded_implication_stays_flat() {
        // (a & b) -> (c | d)
        let f = Formula::implies(Formula::And(vec![v(0), v(1)]), Formula::Or(vec![v(2), v(3)]));
        let cnf = formulas_to_cnf(4, &[f]);
        assert_eq!(cnf.num_vars, 4);
        assert_eq!(cnf.clauses, vec![vec![-1, -2, 3, 4]]);
    }

    #[test]
    fn false_constant_yields_empty_clause() {
        let cnf = formulas_to_cnf(1, &[Formula::Const(false)]);
        assert!(cnf.has_empty_clause());
        let cnf = formulas_to_cnf(1, &[Formula::Const(true)]);
        assert!(cnf.clauses.is_empty());
    }

    #[test]
    fn tautologies_are_dropped() {
        let cnf = formulas_to_cnf(1, &[Formula::Or(vec![v(0), Formula::not(v(0))])]);
        assert!(cnf.clauses.is_empty());
    }
}
