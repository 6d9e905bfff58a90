//! Flattened-model files: DIMACS CNF with a variable table in comment lines.
//!
//! ```text
//! c featnet flattened model
//! c var 1 Block#1 instance
//! c var 2 Block#1.kernel=3 attribute
//! c var 3 _t3 internal
//! p cnf 3 2
//! 1 -2 0
//! -3 2 0
//! ```
//!
//! The reader also accepts bare `var <index> <name> <kind>` and
//! `clause <lits...> 0` lines.

use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

use super::cnf::{CnfFormula, Lit};
use super::{BooleanModel, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Instance,
    Attribute,
    Internal,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Instance => "instance",
            VarKind::Attribute => "attribute",
            VarKind::Internal => "internal",
        }
    }
}

impl FromStr for VarKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "instance" => Ok(VarKind::Instance),
            "attribute" => Ok(VarKind::Attribute),
            "internal" => Ok(VarKind::Internal),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatFile {
    /// `(name, kind)` per variable, index 0 is variable 1.
    pub variables: Vec<(String, VarKind)>,
    pub cnf: CnfFormula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FlatFileError {
    pub line: usize,
    pub message: String,
}

pub fn write_flat(bm: &BooleanModel, cnf: &CnfFormula) -> String {
    let mut out = String::from("c featnet flattened model\n");
    for v in 1..=cnf.num_vars {
        let (name, kind) = match bm.variables.get(v - 1) {
            Some(var) => (
                var.name.clone(),
                match var.provenance {
                    Provenance::Instance(_) => VarKind::Instance,
                    Provenance::AttributeValue { .. } => VarKind::Attribute,
                },
            ),
            None => (format!("_t{v}"), VarKind::Internal),
        };
        let _ = writeln!(out, "c var {v} {name} {}", kind.as_str());
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

pub fn read_flat(text: &str) -> Result<FlatFile, FlatFileError> {
    let err = |line: usize, message: String| FlatFileError { line, message };
    let mut variables: Vec<Option<(String, VarKind)>> = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks[0] == "c" {
            if toks.get(1) != Some(&"var") {
                continue;
            }
            toks.remove(0);
        }
        match toks[0] {
            "var" => {
                let [_, idx, name, kind] = toks[..] else {
                    return Err(err(lineno, "expected `var <index> <name> <kind>`".into()));
                };
                let idx: usize = idx
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| err(lineno, format!("bad variable index `{idx}`")))?;
                let kind: VarKind = kind.parse().map_err(|_| err(lineno, format!("bad variable kind `{kind}`")))?;
                if variables.len() < idx {
                    variables.resize(idx, None);
                }
                if variables[idx - 1].replace((name.to_string(), kind)).is_some() {
                    return Err(err(lineno, format!("variable {idx} declared twice")));
                }
            }
            "p" => {
                let ["p", "cnf", n, m] = toks[..] else {
                    return Err(err(lineno, "expected `p cnf <vars> <clauses>`".into()));
                };
                let n = n.parse().map_err(|_| err(lineno, format!("bad variable count `{n}`")))?;
                let m = m.parse().map_err(|_| err(lineno, format!("bad clause count `{m}`")))?;
                if header.replace((n, m)).is_some() {
                    return Err(err(lineno, "duplicate problem line".into()));
                }
            }
            first => {
                let body = if first == "clause" { &toks[1..] } else { &toks[..] };
                for t in body {
                    let l: Lit = t.parse().map_err(|_| err(lineno, format!("bad literal `{t}`")))?;
                    if l == 0 {
                        clauses.push(std::mem::take(&mut current));
                    } else {
                        current.push(l);
                    }
                }
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }

    let num_vars = match header {
        Some((n, m)) => {
            if m != clauses.len() {
                return Err(err(0, format!("problem line announces {m} clauses, found {}", clauses.len())));
            }
            n
        }
        None => variables.len(),
    };
    if let Some(l) = clauses.iter().flatten().find(|l| l.unsigned_abs() as usize > num_vars) {
        return Err(err(0, format!("literal {l} exceeds {num_vars} variables")));
    }
    if variables.len() > num_vars {
        return Err(err(0, format!("variable table lists {} variables, expected {num_vars}", variables.len())));
    }
    variables.resize(num_vars, None);
    let variables: Vec<(String, VarKind)> = variables
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.unwrap_or_else(|| (format!("_t{}", i + 1), VarKind::Internal)))
        .collect();
    let provenance_vars = variables.iter().take_while(|(_, k)| *k != VarKind::Internal).count();
    Ok(FlatFile { variables, cnf: CnfFormula { num_vars, clauses, provenance_vars } })
}
