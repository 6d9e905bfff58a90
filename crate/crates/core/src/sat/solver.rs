//! Conflict-driven clause-learning solver with two watched literals, 1UIP
//! learning, activity-based branching and Luby restarts. Initial activities
//! and every branching polarity are drawn from a seeded RNG, so different
//! seeds reach different models of the same formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flatten::{CnfFormula, Lit};

const NO_REASON: u32 = u32::MAX;
const RESTART_BASE: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// `model[i]` is the value of variable `i + 1`.
    Sat(Vec<bool>),
    Unsat,
    /// The conflict budget ran out first.
    Unknown,
}

fn internal(l: Lit) -> u32 {
    let v = l.unsigned_abs() - 1;
    2 * v + u32::from(l < 0)
}

fn var(l: u32) -> usize {
    (l >> 1) as usize
}

fn luby(mut i: u64) -> u64 {
    // i is 0-based; returns 1,1,2,1,1,2,4,...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

struct Heap {
    items: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl Heap {
    fn new(n: usize) -> Self {
        Heap { items: Vec::with_capacity(n), pos: vec![NOT_IN_HEAP; n] }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.items[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.items[p]] >= act[v] {
                break;
            }
            self.items[i] = self.items[p];
            self.pos[self.items[i]] = i;
            i = p;
        }
        self.items[i] = v;
        self.pos[v] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.items[i];
        let n = self.items.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.items[r]] > act[self.items[l]] { r } else { l };
            if act[self.items[c]] <= act[v] {
                break;
            }
            self.items[i] = self.items[c];
            self.pos[self.items[i]] = i;
            i = c;
        }
        self.items[i] = v;
        self.pos[v] = i;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.items.push(v);
        let i = self.items.len() - 1;
        self.pos[v] = i;
        self.up(i, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.items.first()?;
        let last = self.items.pop()?;
        self.pos[top] = NOT_IN_HEAP;
        if !self.items.is_empty() {
            self.items[0] = last;
            self.pos[last] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

pub struct Solver {
    num_vars: usize,
    original: Vec<Vec<Lit>>,
    clauses: Vec<Vec<u32>>,
    watches: Vec<Vec<u32>>,
    vals: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: Heap,
    seen: Vec<bool>,
    rng: ChaCha8Rng,
    ok: bool,
    stats: SolverStats,
}

impl Solver {
    pub fn new(cnf: &CnfFormula, seed: u64) -> Self {
        let n = cnf.num_vars;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut s = Solver {
            num_vars: n,
            original: Vec::new(),
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            vals: vec![0; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            heap: Heap::new(n),
            seen: vec![false; n],
            rng,
            ok: true,
            stats: SolverStats::default(),
        };
        for v in 0..n {
            s.heap.insert(v, &s.activity);
        }
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Counters accumulated over the solver's lifetime.
    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    fn lit_val(&self, l: u32) -> i8 {
        let v = self.vals[var(l)];
        if l & 1 == 1 { -v } else { v }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: u32, reason: u32) {
        let v = var(l);
        self.vals[v] = if l & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause permanently. Literals must refer to existing variables.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        assert!(
            lits.iter().all(|l| *l != 0 && l.unsigned_abs() as usize <= self.num_vars),
            "literal out of range"
        );
        self.original.push(lits.to_vec());
        if !self.ok {
            return;
        }
        self.cancel_until(0);
        let mut c: Vec<u32> = lits.iter().map(|&l| internal(l)).collect();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return;
        }
        if c.iter().any(|&l| self.lit_val(l) == 1) {
            return;
        }
        c.retain(|&l| self.lit_val(l) == 0);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<u32>) -> u32 {
        let ci = self.clauses.len() as u32;
        self.watches[c[0] as usize].push(ci);
        self.watches[c[1] as usize].push(ci);
        self.clauses.push(c);
        ci
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci as usize];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let fv = self.vals[var(first)];
                if (if first & 1 == 1 { -fv } else { fv }) == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let v = self.vals[var(l)];
                    if (if l & 1 == 1 { -v } else { v }) != -1 {
                        c.swap(1, k);
                        self.watches[c[1] as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                if self.lit_val(first) == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, ci);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        if self.heap.contains(v) {
            let i = self.heap.pos[v];
            self.heap.up(i, &self.activity);
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first,
    /// highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<u32>, usize) {
        let mut learnt = vec![0u32];
        let mut pathc = 0usize;
        let mut p: Option<u32> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            let start = usize::from(p.is_some());
            let clen = self.clauses[confl as usize].len();
            for k in start..clen {
                let q = self.clauses[confl as usize][k];
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == current {
                        pathc += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[var(lit)] = false;
            pathc -= 1;
            if pathc == 0 {
                break;
            }
            confl = self.reason[var(lit)];
        }
        learnt[0] = p.expect("analysis visits at least one literal") ^ 1;
        for &l in &learnt[1..] {
            self.seen[var(l)] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[var(learnt[k])] > self.level[var(learnt[best])] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back = self.level[var(learnt[1])] as usize;
        }
        self.var_inc /= 0.95;
        (learnt, back)
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level];
        for k in (keep..self.trail.len()).rev() {
            let v = var(self.trail[k]);
            self.vals[v] = 0;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level);
        self.qhead = keep;
    }

    pub fn solve(&mut self) -> SolveResult {
        self.solve_limited(&[], None)
    }

    pub fn solve_with_assumptions(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.solve_limited(assumptions, None)
    }

    /// Solves under `assumptions`, giving up after `max_conflicts` conflicts.
    pub fn solve_limited(&mut self, assumptions: &[Lit], max_conflicts: Option<u64>) -> SolveResult {
        if !self.ok {
            return SolveResult::Unsat;
        }
        let assumptions: Vec<u32> = assumptions.iter().map(|&l| internal(l)).collect();
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveResult::Unsat;
        }
        let mut budget_used = 0u64;
        let mut restart = 0u64;
        let mut until_restart = luby(restart) * RESTART_BASE;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                budget_used += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveResult::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let l0 = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(l0, ci);
                }
                if max_conflicts.is_some_and(|m| budget_used >= m) {
                    self.cancel_until(0);
                    return SolveResult::Unknown;
                }
                until_restart = until_restart.saturating_sub(1);
                if until_restart == 0 {
                    restart += 1;
                    until_restart = luby(restart) * RESTART_BASE;
                    self.cancel_until(0);
                }
                continue;
            }

            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.lit_val(a) {
                    1 => self.trail_lim.push(self.trail.len()),
                    -1 => {
                        self.cancel_until(0);
                        return SolveResult::Unsat;
                    }
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            if next.is_none() {
                while let Some(v) = self.heap.pop(&self.activity) {
                    if self.vals[v] == 0 {
                        let negative = self.rng.random::<bool>();
                        next = Some(2 * v as u32 + u32::from(negative));
                        break;
                    }
                }
            }
            match next {
                Some(l) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, NO_REASON);
                }
                None => {
                    let model: Vec<bool> = self.vals.iter().map(|&v| v == 1).collect();
                    self.cancel_until(0);
                    assert!(
                        self.original.iter().all(|c| c.iter().any(|&l| {
                            let x = model[l.unsigned_abs() as usize - 1];
                            if l > 0 { x } else { !x }
                        })),
                        "solver produced an assignment that violates an input clause"
                    );
                    return SolveResult::Sat(model);
                }
            }
        }
    }

    /// Forbids the current values of variables `1..=upto` in `model`.
    pub fn block(&mut self, model: &[bool], upto: usize) {
        let clause: Vec<Lit> = (0..upto)
            .map(|i| {
                let l = (i + 1) as Lit;
                if model[i] { -l } else { l }
            })
            .collect();
        self.add_clause(&clause);
    }
}
