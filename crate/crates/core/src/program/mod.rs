//! Ground program representation and answer-set semantics.
//!
//! A program is a set of rules `a0 :- a1, …, al, not al+1, …, not am,
//! not not am+1, …, not not an.` over interned atoms plus a set of bounded
//! integer variable declarations. Atoms are either *regular* or
//! *constraint* atoms; a constraint atom stands for a linear relation over
//! declared variables recorded in the program's `gamma` table, and never
//! appears in a rule head of an input program.
//!
//! The semantics here is the plain reduct-based one for the propositional
//! side: `M` is an answer set of `Π` when `M⁺` is an answer set of `Π^C`
//! (the program extended with a choice rule for every constraint atom) and
//! the constraint literals of `M` are simultaneously satisfiable once
//! mapped through `gamma` (negative literals contribute the complement
//! relation). [`Program::is_answer_set`] and the exhaustive
//! [`Program::enumerate_answer_sets_oracle`] implement that definition
//! directly; the CDCL machinery in [`crate::base`] must agree with them.

mod parse;

pub use parse::{parse_program, ParseError};

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use crate::theory::ConstraintExpr;

/// Dense handle for an interned atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense handle for a declared constraint variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomKind {
    Regular,
    Constraint,
}

/// Rule head: either falsum (an integrity constraint) or a single atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Falsum,
    Atom(AtomId),
}

/// One ground rule. The three body lists hold positive, `not`, and
/// `not not` occurrences; they are pairwise disjoint as atom sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Head,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
    pub negneg: Vec<AtomId>,
}

impl Rule {
    pub fn fact(head: AtomId) -> Self {
        Rule { head: Head::Atom(head), pos: vec![], neg: vec![], negneg: vec![] }
    }

    /// `{a}.` desugared: `a :- not not a.`
    pub fn choice(atom: AtomId) -> Self {
        Rule { head: Head::Atom(atom), pos: vec![], neg: vec![], negneg: vec![atom] }
    }

    pub fn falsum(pos: Vec<AtomId>, neg: Vec<AtomId>) -> Self {
        Rule { head: Head::Falsum, pos, neg, negneg: vec![] }
    }

    /// Atoms of the body in occurrence order, tagged by polarity
    /// (0 = positive, 1 = `not`, 2 = `not not`).
    pub fn body_atoms(&self) -> impl Iterator<Item = (AtomId, u8)> + '_ {
        self.pos
            .iter()
            .map(|&a| (a, 0u8))
            .chain(self.neg.iter().map(|&a| (a, 1u8)))
            .chain(self.negneg.iter().map(|&a| (a, 2u8)))
    }
}

/// Declaration of a bounded integer constraint variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AtomInfo {
    name: String,
    kind: AtomKind,
}

/// A ground program over interned atoms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    atoms: Vec<AtomInfo>,
    atom_ids: HashMap<String, AtomId>,
    pub rules: Vec<Rule>,
    pub decls: Vec<VarDecl>,
    var_ids: HashMap<String, VarId>,
    /// Constraint atom → the linear relation it stands for.
    pub gamma: BTreeMap<AtomId, ConstraintExpr>,
}

/// Error from [`Program::enumerate_answer_sets_oracle`].
#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle limited to 20 atoms, program has {0}")]
    TooManyAtoms(usize),
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_name(&self, a: AtomId) -> &str {
        &self.atoms[a.index()].name
    }

    pub fn atom_kind(&self, a: AtomId) -> AtomKind {
        self.atoms[a.index()].kind
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atom_ids.get(name).copied()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_ids.get(name).copied()
    }

    /// Intern a regular atom by name, returning its dense id.
    pub fn intern_atom(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.atom_ids.get(name) {
            debug_assert_eq!(self.atoms[id.index()].kind, AtomKind::Regular);
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(AtomInfo { name: name.to_string(), kind: AtomKind::Regular });
        self.atom_ids.insert(name.to_string(), id);
        id
    }

    /// Intern a constraint atom. Identity is the canonical text of the
    /// normalized expression, so the same relation written twice yields
    /// the same atom.
    pub fn intern_constraint_atom(&mut self, expr: ConstraintExpr) -> AtomId {
        let name = expr.display(&self.decls).to_string();
        if let Some(&id) = self.atom_ids.get(&name) {
            debug_assert_eq!(self.atoms[id.index()].kind, AtomKind::Constraint);
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(AtomInfo { name: name.clone(), kind: AtomKind::Constraint });
        self.atom_ids.insert(name, id);
        self.gamma.insert(id, expr);
        id
    }

    /// Declare a variable; returns `None` if the name is already taken.
    pub fn declare_var(&mut self, name: &str, lo: i64, hi: i64) -> Option<VarId> {
        if self.var_ids.contains_key(name) {
            return None;
        }
        let id = VarId(self.decls.len() as u32);
        self.decls.push(VarDecl { name: name.to_string(), lo, hi });
        self.var_ids.insert(name.to_string(), id);
        Some(id)
    }

    pub fn constraint_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.gamma.keys().copied()
    }

    pub fn atom_ids_iter(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len() as u32).map(AtomId)
    }

    fn has_choice_rule(&self, a: AtomId) -> bool {
        self.rules.iter().any(|r| {
            r.head == Head::Atom(a) && r.pos.is_empty() && r.neg.is_empty() && r.negneg == [a]
        })
    }

    /// True when every constraint atom has its choice rule, i.e. the
    /// program is already in the `Π^C` form the base solver expects.
    pub fn is_choice_extended(&self) -> bool {
        self.constraint_atoms().all(|c| self.has_choice_rule(c))
    }

    /// `Π^C`: the program extended with `c :- not not c.` for every
    /// constraint atom that does not have one yet. Idempotent.
    pub fn extend_with_choices(&self) -> Program {
        let mut out = self.clone();
        for c in self.constraint_atoms() {
            if !out.has_choice_rule(c) {
                out.rules.push(Rule::choice(c));
            }
        }
        out
    }

    /// Structural well-formedness: occurrence lists pairwise disjoint,
    /// heads of input rules never constraint atoms (choice rules added by
    /// [`Program::extend_with_choices`] are exempt), ids in range.
    pub fn validate(&self) -> Result<(), String> {
        for (i, r) in self.rules.iter().enumerate() {
            let mut seen: Vec<AtomId> = vec![];
            for (a, _) in r.body_atoms() {
                if a.index() >= self.atoms.len() {
                    return Err(format!("rule {i}: atom id {} out of range", a.0));
                }
            }
            for list in [&r.pos, &r.neg, &r.negneg] {
                let mut sorted = list.clone();
                sorted.sort();
                sorted.dedup();
                for a in sorted {
                    if seen.contains(&a) {
                        return Err(format!(
                            "rule {i}: atom `{}` occurs with more than one polarity",
                            self.atom_name(a)
                        ));
                    }
                    seen.push(a);
                }
            }
            if let Head::Atom(a) = r.head {
                if a.index() >= self.atoms.len() {
                    return Err(format!("rule {i}: head atom id out of range"));
                }
                let is_choice = r.pos.is_empty() && r.neg.is_empty() && r.negneg == [a];
                if self.atom_kind(a) == AtomKind::Constraint && !is_choice {
                    return Err(format!(
                        "rule {i}: constraint atom `{}` in head position",
                        self.atom_name(a)
                    ));
                }
            }
        }
        for d in &self.decls {
            if d.lo > d.hi {
                return Err(format!("variable `{}` has empty domain {}..{}", d.name, d.lo, d.hi));
            }
        }
        Ok(())
    }

    /// Canonical text form. Parsing the result yields a program equal to
    /// `self` (for programs that came from the parser or the encoders).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.decls {
            out.push_str(&format!("#var {} {}..{}.\n", d.name, d.lo, d.hi));
        }
        for r in &self.rules {
            out.push_str(&self.rule_text(r));
            out.push('\n');
        }
        out
    }

    pub fn rule_text(&self, r: &Rule) -> String {
        let mut s = String::new();
        match r.head {
            Head::Falsum => s.push_str("#false"),
            Head::Atom(a) => s.push_str(self.atom_name(a)),
        }
        let body: Vec<String> = r
            .pos
            .iter()
            .map(|&a| self.atom_name(a).to_string())
            .chain(r.neg.iter().map(|&a| format!("not {}", self.atom_name(a))))
            .chain(r.negneg.iter().map(|&a| format!("not not {}", self.atom_name(a))))
            .collect();
        if !body.is_empty() {
            s.push_str(" :- ");
            s.push_str(&body.join(", "));
        }
        s.push('.');
        s
    }

    /// Least model of the reduct of `Π^C` w.r.t. the positive part of a
    /// complete assignment. Returns `None` when a falsum rule survives the
    /// reduct and fires under the least model (no answer set possible).
    pub(crate) fn reduct_least_model(&self, m: &[bool]) -> Option<Vec<bool>> {
        let n = self.n_atoms();
        debug_assert_eq!(m.len(), n);
        // Rules surviving the reduct, with only their positive bodies.
        let mut survivors: Vec<(&Rule, bool)> = Vec::new(); // (rule, is_falsum)
        'rules: for r in &self.rules {
            for &a in &r.neg {
                if m[a.index()] {
                    continue 'rules;
                }
            }
            for &a in &r.negneg {
                if !m[a.index()] {
                    continue 'rules;
                }
            }
            survivors.push((r, r.head == Head::Falsum));
        }
        let mut lm = vec![false; n];
        let mut changed = true;
        while changed {
            changed = false;
            for (r, is_falsum) in &survivors {
                if *is_falsum {
                    continue;
                }
                let Head::Atom(h) = r.head else { unreachable!() };
                if lm[h.index()] {
                    continue;
                }
                if r.pos.iter().all(|&a| lm[a.index()]) {
                    lm[h.index()] = true;
                    changed = true;
                }
            }
        }
        for (r, is_falsum) in &survivors {
            if *is_falsum && r.pos.iter().all(|&a| lm[a.index()]) {
                return None;
            }
        }
        Some(lm)
    }

    /// Decide whether the complete assignment `m` is an answer set of this
    /// program: its positive part must be an answer set of `Π^C`, and its
    /// constraint literals must be satisfiable per `theory_sat`.
    pub fn is_answer_set<F>(&self, m: &CandidateModel, theory_sat: &mut F) -> bool
    where
        F: FnMut(&[(AtomId, bool)]) -> bool,
    {
        assert_eq!(m.len(), self.n_atoms(), "candidate incomplete for this program");
        let extended = self.extend_with_choices();
        let Some(lm) = extended.reduct_least_model(&m.values) else {
            return false;
        };
        if lm != m.values {
            return false;
        }
        let lits = m.constraint_literals(self);
        if lits.is_empty() {
            return true;
        }
        theory_sat(&lits)
    }

    /// Exhaustive reference enumeration of answer sets: checks every
    /// complete assignment over the program's atoms, in lexicographic
    /// order (atom 0 most significant, `false < true`). Only usable on
    /// small programs; errs above 20 atoms.
    pub fn enumerate_answer_sets_oracle<F>(
        &self,
        theory_sat: &mut F,
    ) -> Result<Vec<CandidateModel>, OracleError>
    where
        F: FnMut(&[(AtomId, bool)]) -> bool,
    {
        let n = self.n_atoms();
        if n > 20 {
            return Err(OracleError::TooManyAtoms(n));
        }
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << n) {
            let values: Vec<bool> =
                (0..n).map(|i| (mask >> (n - 1 - i)) & 1 == 1).collect();
            let m = CandidateModel::new(values);
            if self.is_answer_set(&m, theory_sat) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

/// A complete truth assignment over a program's atoms (auxiliary solver
/// variables excluded).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateModel {
    pub values: Vec<bool>,
}

impl CandidateModel {
    pub fn new(values: Vec<bool>) -> Self {
        CandidateModel { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, a: AtomId) -> bool {
        self.values[a.index()]
    }

    /// `M⁺`: ids of atoms assigned true, ascending.
    pub fn positive_atoms(&self) -> Vec<AtomId> {
        (0..self.values.len() as u32).map(AtomId).filter(|a| self.value(*a)).collect()
    }

    /// `M^C`: constraint literals of the assignment, ascending by atom id.
    pub fn constraint_literals(&self, p: &Program) -> Vec<(AtomId, bool)> {
        (0..self.values.len() as u32)
            .map(AtomId)
            .filter(|&a| p.atom_kind(a) == AtomKind::Constraint)
            .map(|a| (a, self.value(a)))
            .collect()
    }

    /// Names of true atoms, sorted, for display and tests.
    pub fn true_names<'p>(&self, p: &'p Program) -> Vec<&'p str> {
        let mut v: Vec<&str> =
            self.positive_atoms().iter().map(|&a| p.atom_name(a)).collect();
        v.sort_unstable();
        v
    }
}

impl fmt::Display for CandidateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (i, &v) in self.values.iter().enumerate() {
            if v {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{i}")?;
                first = false;
            }
        }
        write!(f, "}}")
    }
}
