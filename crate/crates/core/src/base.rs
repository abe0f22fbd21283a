//! CDCL base solver over the Clark completion of a choice-extended ground
//! program, with loop-formula refinement for non-tight programs.
//!
//! The completion introduces one auxiliary variable per distinct rule body
//! with at least two literals (`aux ↔ body`); bodies of integrity
//! constraints become plain clauses. An atom with no rules is fixed false;
//! a choice rule makes its atom's support clause tautological, leaving the
//! atom free. Whenever search reaches a total assignment, the candidate is
//! checked for stability against the reduct; if some true atoms are
//! unfounded, the smallest strongly connected component of the positive
//! dependency graph whose loop formula the candidate violates is learned
//! as a clause and search resumes, so a candidate never escapes unstably.
//!
//! Search is deliberately plain CDCL: two-watched-literal propagation,
//! first-UIP conflict analysis, activity-driven decisions with saved
//! phases (initial phase false), and Luby restarts with unit 64. There is
//! no randomness, so identically configured solves are bit-identical.
//!
//! Incremental use: [`Solver::add_falsum_rules`] adds integrity
//! constraints (e.g. blocking rules) between solves while keeping learned
//! clauses and activities. On-line use: [`Solver::set_callbacks`] installs
//! a theory callback invoked at every propagation fixpoint that fixed at
//! least one new constraint literal; a conflict reply is turned into a
//! conflicting clause, analyzed, and retained like any learned clause.

use std::collections::HashMap;
use std::time::Instant;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::program::{AtomId, AtomKind, CandidateModel, Head, Program, Rule};

/// Propositional literal: variable index shifted left, low bit = negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Lit(u32);

impl Lit {
    fn pos(var: usize) -> Lit {
        Lit((var as u32) << 1)
    }

    fn neg(var: usize) -> Lit {
        Lit(((var as u32) << 1) | 1)
    }

    fn with_sign(var: usize, positive: bool) -> Lit {
        if positive {
            Lit::pos(var)
        } else {
            Lit::neg(var)
        }
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn is_pos(self) -> bool {
        self.0 & 1 == 0
    }

    fn flip(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
}

/// How a rule body is represented in the completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BodyRepr {
    /// Empty body (a fact).
    True,
    /// The body is a single literal, or an auxiliary equivalence variable.
    Lit(Lit),
}

/// Counters exposed by one solver instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct BaseStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learned_count: u64,
    pub callback_calls: u64,
}

impl BaseStats {
    /// Pointwise sum, used to aggregate across black-box instantiations.
    pub fn add(&mut self, o: &BaseStats) {
        self.decisions += o.decisions;
        self.propagations += o.propagations;
        self.conflicts += o.conflicts;
        self.restarts += o.restarts;
        self.learned_count += o.learned_count;
        self.callback_calls += o.callback_calls;
    }
}

/// Reply from the theory callback.
#[derive(Debug, Clone)]
pub enum TheoryResponse {
    Ok,
    /// A set of currently assigned constraint literals whose conjunction
    /// is theory-inconsistent.
    Conflict(Vec<(AtomId, bool)>),
}

/// Callback invoked at each propagation fixpoint with the constraint
/// literals fixed since the previous fixpoint and the full set of
/// currently assigned constraint literals.
pub type FixpointCallback<'cb> =
    Box<dyn FnMut(&[(AtomId, bool)], &[(AtomId, bool)]) -> TheoryResponse + 'cb>;

/// Hooks for on-line (clear-box) integration.
pub struct OnlineCallbacks<'cb> {
    pub on_constraint_literals_extended: FixpointCallback<'cb>,
}

/// Result of one [`Solver::solve`] call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A stable (and callback-approved) total candidate.
    Sat(CandidateModel),
    Unsat,
    /// The wall-clock budget ran out; counters are still meaningful.
    Budget,
}

#[derive(Debug, thiserror::Error)]
pub enum InitError {
    #[error("program is not choice-extended: constraint atom `{0}` has no choice rule")]
    NotChoiceExtended(String),
    #[error("invalid program: {0}")]
    Invalid(String),
}

const RESTART_UNIT: u64 = 64;
const BUDGET_CHECK_INTERVAL: u64 = 1024;

/// One CDCL solver instance over a fixed choice-extended program.
pub struct Solver<'cb> {
    program: Program,
    n_program_atoms: usize,
    is_constraint: Vec<bool>,
    /// Body representation per rule, aligned with `program.rules`.
    rule_bodies: Vec<BodyRepr>,

    n_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    saved_phase: Vec<bool>,
    ok: bool,

    callbacks: Option<OnlineCallbacks<'cb>>,
    cb_mark: usize,
    deadline: Option<Instant>,
    luby_idx: u64,
    conflicts_at_restart: u64,

    stats: BaseStats,
}

impl<'cb> Solver<'cb> {
    /// Build the completion of a choice-extended program. Rejects programs
    /// where some constraint atom lacks its choice rule.
    pub fn init(p: &Program) -> Result<Self, InitError> {
        for c in p.constraint_atoms() {
            let has_choice = p.rules.iter().any(|r| {
                r.head == Head::Atom(c) && r.pos.is_empty() && r.neg.is_empty() && r.negneg == [c]
            });
            if !has_choice {
                return Err(InitError::NotChoiceExtended(p.atom_name(c).to_string()));
            }
        }
        p.validate().map_err(InitError::Invalid)?;

        let n_atoms = p.n_atoms();
        let mut s = Solver {
            program: p.clone(),
            n_program_atoms: n_atoms,
            is_constraint: (0..n_atoms as u32)
                .map(|a| p.atom_kind(AtomId(a)) == AtomKind::Constraint)
                .collect(),
            rule_bodies: Vec::with_capacity(p.rules.len()),
            n_vars: 0,
            clauses: vec![],
            watches: vec![],
            assign: vec![],
            level: vec![],
            reason: vec![],
            trail: vec![],
            trail_lim: vec![],
            qhead: 0,
            activity: vec![],
            var_inc: 1.0,
            heap: VarHeap::default(),
            saved_phase: vec![],
            ok: true,
            callbacks: None,
            cb_mark: 0,
            deadline: None,
            luby_idx: 0,
            conflicts_at_restart: 0,
            stats: BaseStats::default(),
        };
        for _ in 0..n_atoms {
            s.new_var();
        }
        s.build_completion();
        Ok(s)
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn set_callbacks(&mut self, cbs: OnlineCallbacks<'cb>) {
        self.callbacks = Some(cbs);
    }

    pub fn stats(&self) -> BaseStats {
        self.stats
    }

    fn new_var(&mut self) -> usize {
        let v = self.n_vars;
        self.n_vars += 1;
        self.watches.push(vec![]);
        self.watches.push(vec![]);
        self.assign.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.saved_phase.push(false);
        self.heap.insert(v, &self.activity);
        v
    }

    fn body_literals(r: &Rule) -> Vec<Lit> {
        // `not not a` behaves like `a` classically; the distinction only
        // matters for the reduct, which the stability check handles.
        r.pos
            .iter()
            .map(|a| Lit::pos(a.index()))
            .chain(r.neg.iter().map(|a| Lit::neg(a.index())))
            .chain(r.negneg.iter().map(|a| Lit::pos(a.index())))
            .collect()
    }

    fn build_completion(&mut self) {
        let rules = std::mem::take(&mut self.program.rules);
        let mut body_aux: HashMap<Vec<Lit>, Lit> = HashMap::new();
        let mut heads: Vec<Vec<BodyRepr>> = vec![vec![]; self.n_program_atoms];
        let mut falsum_clauses: Vec<Vec<Lit>> = vec![];

        for r in &rules {
            let lits = Self::body_literals(r);
            if r.head == Head::Falsum {
                self.rule_bodies.push(BodyRepr::True); // unused for falsum
                falsum_clauses.push(lits.iter().map(|l| l.flip()).collect());
                continue;
            }
            let repr = match lits.len() {
                0 => BodyRepr::True,
                1 => BodyRepr::Lit(lits[0]),
                _ => {
                    let mut key = lits.clone();
                    key.sort_unstable();
                    key.dedup();
                    if key.len() == 1 {
                        BodyRepr::Lit(key[0])
                    } else if let Some(&aux) = body_aux.get(&key) {
                        BodyRepr::Lit(aux)
                    } else {
                        let aux = Lit::pos(self.new_var());
                        body_aux.insert(key.clone(), aux);
                        // aux → each literal; all literals → aux.
                        for &l in &key {
                            self.add_clause_now(vec![aux.flip(), l], false);
                        }
                        let mut big: Vec<Lit> =
                            key.iter().map(|l| l.flip()).collect();
                        big.push(aux);
                        self.add_clause_now(big, false);
                        BodyRepr::Lit(aux)
                    }
                }
            };
            self.rule_bodies.push(repr);
            if let Head::Atom(h) = r.head {
                heads[h.index()].push(repr);
            }
        }

        for atom in 0..self.n_program_atoms {
            let head_lit = Lit::pos(atom);
            let bodies = &heads[atom];
            if bodies.contains(&BodyRepr::True) {
                // A fact: the atom is simply true.
                self.add_clause_now(vec![head_lit], false);
                continue;
            }
            if bodies.is_empty() {
                self.add_clause_now(vec![head_lit.flip()], false);
                continue;
            }
            // Body → head implications.
            for b in bodies {
                let BodyRepr::Lit(bl) = *b else { unreachable!() };
                if bl != head_lit {
                    self.add_clause_now(vec![bl.flip(), head_lit], false);
                }
            }
            // Support: head → disjunction of bodies. A choice rule puts the
            // head itself on the right side, making this a tautology.
            let mut support = vec![head_lit.flip()];
            for b in bodies {
                let BodyRepr::Lit(bl) = *b else { unreachable!() };
                support.push(bl);
            }
            self.add_clause_now(support, false);
        }

        for lits in falsum_clauses {
            self.add_clause_now(lits, false);
        }
        self.program.rules = rules;
    }

    /// Add a clause while at decision level 0, simplifying against fixed
    /// literals. Returns false when the clause is empty (solver now unsat).
    fn add_clause_now(&mut self, mut lits: Vec<Lit>, learned: bool) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return false;
        }
        lits.sort_unstable();
        lits.dedup();
        // Tautology or satisfied-at-level-0 clauses can be dropped; false
        // literals at level 0 can be removed.
        let mut i = 0;
        while i < lits.len() {
            if i + 1 < lits.len() && lits[i].var() == lits[i + 1].var() {
                return true; // contains l and ¬l
            }
            match self.value(lits[i]) {
                Some(true) => return true,
                Some(false) => {
                    lits.remove(i);
                }
                None => i += 1,
            }
        }
        if learned {
            self.stats.learned_count += 1;
        }
        match lits.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(lits[0], None);
                true
            }
            _ => {
                self.attach(lits);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(idx);
        self.watches[lits[1].code()].push(idx);
        self.clauses.push(Clause { lits });
        idx
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var()].map(|v| v == l.is_pos())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        debug_assert_eq!(self.value(l), None);
        let v = l.var();
        self.assign[v] = Some(l.is_pos());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let bound = self.trail_lim[lvl as usize];
        while self.trail.len() > bound {
            let l = self.trail.pop().unwrap();
            let v = l.var();
            self.saved_phase[v] = l.is_pos();
            self.assign[v] = None;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
        self.cb_mark = self.cb_mark.min(self.trail.len());
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.flip();
            let ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut wi = 0;
            while wi < ws.len() {
                let ci = ws[wi];
                wi += 1;
                let clause = &mut self.clauses[ci as usize];
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                debug_assert_eq!(clause.lits[1], false_lit);
                let first = clause.lits[0];
                if self.assign[first.var()].map(|v| v == first.is_pos()) == Some(true) {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.lits.len() {
                    let l = clause.lits[k];
                    if self.assign[l.var()].map(|v| v == l.is_pos()) != Some(false) {
                        clause.lits.swap(1, k);
                        self.watches[l.code()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if self.assign[first.var()].map(|v| v == first.is_pos()) == Some(false) {
                    // Conflict: keep the remaining watchers and bail out.
                    kept.extend_from_slice(&ws[wi..]);
                    self.qhead = self.trail.len();
                    conflict = Some(ci);
                    break;
                }
                self.enqueue(first, Some(ci));
            }
            self.watches[false_lit.code()].extend(kept);
            if conflict.is_some() {
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
        self.heap.on_increase(v, &self.activity);
    }

    /// First-UIP analysis. Returns the learned clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, confl: u32) -> (Vec<Lit>, u32) {
        let cur = self.decision_level();
        let mut seen = vec![false; self.n_vars];
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // placeholder for the UIP
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut clause_idx = confl;
        loop {
            for qi in 0..self.clauses[clause_idx as usize].lits.len() {
                let q = self.clauses[clause_idx as usize].lits[qi];
                if Some(q) == p {
                    continue;
                }
                let v = q.var();
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= cur {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if seen[self.trail[idx].var()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            seen[pl.var()] = false;
            counter -= 1;
            p = Some(pl);
            if counter == 0 {
                break;
            }
            clause_idx = self.reason[pl.var()].expect("non-decision must have a reason");
        }
        learnt[0] = p.unwrap().flip();
        // Backjump to the second-highest level in the clause; put a literal
        // of that level in the second watch position.
        let mut bl = 0;
        let mut pos = 0;
        for (i, l) in learnt.iter().enumerate().skip(1) {
            if self.level[l.var()] > bl {
                bl = self.level[l.var()];
                pos = i;
            }
        }
        if pos != 0 {
            learnt.swap(1, pos);
        }
        (learnt, bl)
    }

    fn record_learned(&mut self, learnt: Vec<Lit>, backjump: u32) {
        self.cancel_until(backjump);
        self.stats.learned_count += 1;
        if learnt.len() == 1 {
            debug_assert_eq!(self.decision_level(), backjump);
            if self.value(learnt[0]) == Some(false) {
                self.ok = false;
                return;
            }
            if self.value(learnt[0]).is_none() {
                self.enqueue(learnt[0], None);
            }
        } else {
            let asserting = learnt[0];
            let ci = self.attach(learnt);
            self.enqueue(asserting, Some(ci));
        }
        self.var_inc /= 0.95;
    }

    fn decide(&mut self) -> bool {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v].is_none() {
                self.stats.decisions += 1;
                self.trail_lim.push(self.trail.len());
                self.enqueue(Lit::with_sign(v, self.saved_phase[v]), None);
                return true;
            }
        }
        false
    }

    fn over_deadline(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Handle a theory-conflict reason: turn it into a clause, retain it,
    /// and run conflict analysis on it. Returns false when the conflict
    /// proves unsatisfiability.
    fn theory_conflict(&mut self, reason: &[(AtomId, bool)]) -> bool {
        assert!(!reason.is_empty(), "theory conflict with empty reason");
        let mut lits = Vec::with_capacity(reason.len());
        let mut max_level = 0;
        for &(a, sign) in reason {
            let l = Lit::with_sign(a.index(), sign);
            assert_eq!(
                self.value(l),
                Some(true),
                "theory conflict reason contains a literal that is not currently assigned: {} {}",
                self.program.atom_name(a),
                sign
            );
            max_level = max_level.max(self.level[a.index()]);
            lits.push(l.flip());
        }
        self.stats.conflicts += 1;
        if max_level == 0 {
            self.ok = false;
            return false;
        }
        self.cancel_until(max_level);
        // Dedup, then watch the two highest-level literals so the clause
        // behaves after future backjumps.
        lits.sort_unstable();
        lits.dedup();
        lits.sort_by_key(|l| std::cmp::Reverse(self.level[l.var()]));
        self.stats.learned_count += 1;
        if lits.len() == 1 {
            self.cancel_until(0);
            if self.value(lits[0]) == Some(false) {
                self.ok = false;
                return false;
            }
            if self.value(lits[0]).is_none() {
                self.enqueue(lits[0], None);
            }
            return true;
        }
        let ci = self.attach(lits);
        let (learnt, bl) = self.analyze(ci);
        self.record_learned(learnt, bl);
        self.ok
    }

    /// Run the theory callback if new constraint literals were fixed since
    /// the last fixpoint. Returns false on a level-0 theory conflict.
    fn fixpoint_callback(&mut self) -> bool {
        if self.callbacks.is_none() {
            return true;
        }
        let mut newly: Vec<(AtomId, bool)> = vec![];
        for &l in &self.trail[self.cb_mark..] {
            let v = l.var();
            if v < self.n_program_atoms && self.is_constraint[v] {
                newly.push((AtomId(v as u32), l.is_pos()));
            }
        }
        self.cb_mark = self.trail.len();
        if newly.is_empty() {
            return true;
        }
        let current: Vec<(AtomId, bool)> = (0..self.n_program_atoms)
            .filter(|&v| self.is_constraint[v])
            .filter_map(|v| self.assign[v].map(|b| (AtomId(v as u32), b)))
            .collect();
        self.stats.callback_calls += 1;
        let cbs = self.callbacks.as_mut().unwrap();
        let response = (cbs.on_constraint_literals_extended)(&newly, &current);
        match response {
            TheoryResponse::Ok => true,
            TheoryResponse::Conflict(reason) => self.theory_conflict(&reason),
        }
    }

    /// Candidate over program atoms from the current total assignment.
    fn extract_model(&self) -> CandidateModel {
        CandidateModel::new(
            (0..self.n_program_atoms)
                .map(|v| self.assign[v].expect("total assignment"))
                .collect(),
        )
    }

    /// Stability check on a total assignment. On failure learns the loop
    /// formula of the smallest violated unfounded SCC, cancels to level 0,
    /// and returns false.
    fn stable_or_learn(&mut self) -> bool {
        let m: Vec<bool> = (0..self.n_program_atoms)
            .map(|v| self.assign[v].expect("total assignment"))
            .collect();
        let lm = self
            .program
            .reduct_least_model(&m)
            .expect("completion model cannot fire a falsum rule");
        if lm == m {
            return true;
        }
        // Unfounded atoms: true in the candidate but underivable. Build the
        // positive dependency graph restricted to them.
        let unfounded: Vec<usize> =
            (0..self.n_program_atoms).filter(|&v| m[v] && !lm[v]).collect();
        debug_assert!(!unfounded.is_empty());
        let mut g = DiGraph::<usize, ()>::new();
        let node_of: HashMap<usize, _> =
            unfounded.iter().map(|&v| (v, g.add_node(v))).collect();
        for r in &self.program.rules {
            let Head::Atom(h) = r.head else { continue };
            let Some(&from) = node_of.get(&h.index()) else { continue };
            for a in &r.pos {
                if let Some(&to) = node_of.get(&a.index()) {
                    g.add_edge(from, to, ());
                }
            }
        }
        // Loop formula of an SCC L: the conjunction of L implies the
        // disjunction of its external support bodies. Every sink SCC of the
        // unfounded subgraph has a violated formula; pick the smallest
        // violated one overall.
        let mut best: Option<(usize, usize, Vec<Lit>)> = None;
        for scc in tarjan_scc(&g) {
            let atoms: Vec<usize> = scc.iter().map(|n| g[*n]).collect();
            let Some(clause) = self.loop_clause(&atoms) else { continue };
            if !clause.iter().all(|&l| self.value(l) == Some(false)) {
                continue;
            }
            let key = (atoms.len(), *atoms.iter().min().unwrap());
            if best.as_ref().is_none_or(|(s, mi, _)| key < (*s, *mi)) {
                best = Some((key.0, key.1, clause));
            }
        }
        let (_, _, clause) =
            best.expect("some unfounded SCC must have a violated loop formula");
        self.cancel_until(0);
        self.add_clause_now(clause, true);
        false
    }

    /// Clause form of the loop formula for the atom set `l`: ¬a for each
    /// member plus every external support body. `None` when tautological.
    fn loop_clause(&self, l: &[usize]) -> Option<Vec<Lit>> {
        let mut lits: Vec<Lit> = l.iter().map(|&v| Lit::neg(v)).collect();
        for (ri, r) in self.program.rules.iter().enumerate() {
            let Head::Atom(h) = r.head else { continue };
            if !l.contains(&h.index()) {
                continue;
            }
            if r.pos.iter().any(|a| l.contains(&a.index())) {
                continue; // internal support
            }
            match self.rule_bodies[ri] {
                BodyRepr::True => return None, // facts cannot be unfounded
                BodyRepr::Lit(bl) => lits.push(bl),
            }
        }
        lits.sort_unstable();
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].var() == w[1].var() {
                return None; // tautological
            }
        }
        Some(lits)
    }

    /// Add integrity constraints (head `#false`) incrementally. Learned
    /// clauses, activities, and phases are all retained.
    pub fn add_falsum_rules(&mut self, rules: &[Rule]) {
        self.cancel_until(0);
        for r in rules {
            assert_eq!(r.head, Head::Falsum, "add_falsum_rules takes integrity constraints");
            for (a, _) in r.body_atoms() {
                assert!(a.index() < self.n_program_atoms, "unknown atom in falsum rule");
            }
            let lits: Vec<Lit> =
                Self::body_literals(r).iter().map(|l| l.flip()).collect();
            self.add_clause_now(lits, false);
            self.program.rules.push(r.clone());
            self.rule_bodies.push(BodyRepr::True);
        }
    }

    /// Run search until a stable model, unsatisfiability, or the deadline.
    pub fn solve(&mut self) -> SolveOutcome {
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        if self.over_deadline() {
            return SolveOutcome::Budget;
        }
        self.cancel_until(0);
        self.cb_mark = 0;
        let mut restart_limit = RESTART_UNIT * luby(self.luby_idx);
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveOutcome::Unsat;
                }
                let (learnt, bl) = self.analyze(confl);
                self.record_learned(learnt, bl);
                if !self.ok {
                    return SolveOutcome::Unsat;
                }
                if self.stats.conflicts.is_multiple_of(BUDGET_CHECK_INTERVAL)
                    && self.over_deadline()
                {
                    return SolveOutcome::Budget;
                }
                if self.stats.conflicts - self.conflicts_at_restart >= restart_limit {
                    self.stats.restarts += 1;
                    self.luby_idx += 1;
                    self.conflicts_at_restart = self.stats.conflicts;
                    restart_limit = RESTART_UNIT * luby(self.luby_idx);
                    self.cancel_until(0);
                }
                continue;
            }
            // Propagation fixpoint.
            if !self.fixpoint_callback() {
                return SolveOutcome::Unsat;
            }
            if self.qhead < self.trail.len() {
                continue; // a theory conflict enqueued something to propagate
            }
            if self.trail.len() == self.n_vars {
                if self.over_deadline() {
                    return SolveOutcome::Budget;
                }
                if self.stable_or_learn() {
                    return SolveOutcome::Sat(self.extract_model());
                }
                if !self.ok {
                    return SolveOutcome::Unsat;
                }
                continue;
            }
            if !self.decide() {
                unreachable!("decision requested with a full trail");
            }
        }
    }
}

/// Luby restart sequence 1, 1, 2, 1, 1, 2, 4, … for 0-based `x`.
fn luby(mut x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

/// Binary max-heap over variable indices ordered by activity, ties broken
/// toward the smaller index so decisions are deterministic.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (aa, ab) = (act[a as usize], act[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        while self.pos.len() <= v {
            self.pos.push(-1);
        }
        if self.pos[v] >= 0 {
            return;
        }
        self.pos[v] = self.heap.len() as i32;
        self.heap.push(v as u32);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top as usize)
    }

    fn on_increase(&mut self, v: usize, act: &[f64]) {
        if self.pos.get(v).copied().unwrap_or(-1) >= 0 {
            self.sift_up(self.pos[v] as usize, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && Self::better(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::better(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                return;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = i as i32;
        self.pos[self.heap[j] as usize] = j as i32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    fn blocking_rule(p: &Program, m: &CandidateModel) -> Rule {
        let mut pos = vec![];
        let mut neg = vec![];
        for a in p.atom_ids_iter() {
            if m.value(a) {
                pos.push(a);
            } else {
                neg.push(a);
            }
        }
        Rule::falsum(pos, neg)
    }

    /// Enumerate all stable models with one retained solver and blocking
    /// rules (the incremental style).
    fn enumerate_retained(p: &Program) -> (Vec<CandidateModel>, BaseStats) {
        let pc = p.extend_with_choices();
        let mut s = Solver::init(&pc).unwrap();
        let mut out = vec![];
        loop {
            match s.solve() {
                SolveOutcome::Sat(m) => {
                    let b = blocking_rule(&pc, &m);
                    out.push(m);
                    s.add_falsum_rules(&[b]);
                }
                SolveOutcome::Unsat => return (out, s.stats()),
                SolveOutcome::Budget => panic!("no deadline was set"),
            }
        }
    }

    /// Enumerate with a fresh solver per candidate (the from-scratch style).
    fn enumerate_fresh(p: &Program) -> Vec<CandidateModel> {
        let pc = p.extend_with_choices();
        let mut blocked: Vec<Rule> = vec![];
        let mut out = vec![];
        loop {
            let mut s = Solver::init(&pc).unwrap();
            s.add_falsum_rules(&blocked);
            match s.solve() {
                SolveOutcome::Sat(m) => {
                    blocked.push(blocking_rule(&pc, &m));
                    out.push(m);
                }
                SolveOutcome::Unsat => return out,
                SolveOutcome::Budget => panic!("no deadline was set"),
            }
        }
    }

    fn check_against_oracle(text: &str) {
        let p = parse_program(text).unwrap();
        let mut oracle = p.enumerate_answer_sets_oracle(&mut |_| true).unwrap();
        let (mut got, _) = enumerate_retained(&p);
        let mut fresh = enumerate_fresh(&p);
        oracle.sort();
        got.sort();
        fresh.sort();
        assert_eq!(got, oracle, "retained enumeration differs on: {text}");
        assert_eq!(fresh, oracle, "fresh enumeration differs on: {text}");
    }

    #[test]
    fn init_rejects_programs_without_choice_rules() {
        let p = parse_program(
            "#var x 0..24. am :- x #< 12. lighton :- switch, not am. {switch}. :- not lighton.",
        )
        .unwrap();
        let Err(err) = Solver::init(&p) else { panic!("init must reject") };
        assert!(matches!(err, InitError::NotChoiceExtended(ref name) if name == "x #< 12"));
        assert!(Solver::init(&p.extend_with_choices()).is_ok());
    }

    #[test]
    fn empty_program_has_exactly_the_empty_model() {
        let (models, _) = enumerate_retained(&Program::new());
        assert_eq!(models.len(), 1);
        assert!(models[0].values.is_empty());
    }

    #[test]
    fn unsupported_atom_forces_unsat() {
        let p = parse_program(":- not a.").unwrap();
        let mut s = Solver::init(&p).unwrap();
        assert_eq!(s.solve(), SolveOutcome::Unsat);
    }

    #[test]
    fn positive_loop_without_external_support_stays_false() {
        check_against_oracle("a :- b. b :- a.");
        check_against_oracle("a :- a.");
        check_against_oracle("{g}. a :- b, g. b :- a.");
    }

    #[test]
    fn positive_loop_forced_true_is_unsat() {
        for text in ["a :- b. b :- a. :- not a.", "{c}. a :- b, c. b :- a. :- not a."] {
            let p = parse_program(text).unwrap().extend_with_choices();
            let mut s = Solver::init(&p).unwrap();
            assert_eq!(s.solve(), SolveOutcome::Unsat, "on: {text}");
        }
    }

    #[test]
    fn enumeration_matches_oracle_on_assorted_programs() {
        for text in [
            "{a}. {b}. {c}.",
            "a. b :- a. {c}. d :- c, not b.",
            "p :- not q. q :- not p.",
            "a :- not not a.",
            "{x1}. {x2}. y :- x1, not x2. z :- y. w :- z, x2. :- w.",
            "{a}. {b}. :- a, b. c :- a. c :- b. d :- c, not e. e :- not c.",
            "{s}. t :- s. u :- t, not v. v :- not u, not s.",
        ] {
            check_against_oracle(text);
        }
    }

    #[test]
    fn light_switch_base_has_unique_completion_stable_model() {
        let p = parse_program(
            "#var x 0..24. am :- x #< 12. lighton :- switch, not am. {switch}. :- not lighton.",
        )
        .unwrap();
        let (models, _) = enumerate_retained(&p);
        assert_eq!(models.len(), 1);
        let names = models[0].true_names(&p);
        assert_eq!(names, vec!["lighton", "switch"]);
    }

    #[test]
    fn callbacks_see_constraint_literals_and_can_conflict() {
        let text =
            "#var x 0..24. am :- x #< 12. lighton :- switch, not am. {switch}. :- not lighton.";
        let p = parse_program(text).unwrap().extend_with_choices();
        let c = p.atom_id("x #< 12").unwrap();

        // Approving callback: the unique model survives and the callback
        // runs at least once, seeing only constraint literals.
        let mut s = Solver::init(&p).unwrap();
        let kinds: Vec<AtomKind> =
            p.atom_ids_iter().map(|a| p.atom_kind(a)).collect();
        s.set_callbacks(OnlineCallbacks {
            on_constraint_literals_extended: Box::new(move |newly, current| {
                assert!(!newly.is_empty());
                for (a, _) in newly {
                    assert_eq!(kinds[a.index()], AtomKind::Constraint);
                }
                for lit in newly {
                    assert!(current.contains(lit));
                }
                TheoryResponse::Ok
            }),
        });
        let SolveOutcome::Sat(m) = s.solve() else { panic!("expected sat") };
        assert!(!m.value(c));
        assert!(s.stats().callback_calls >= 1);

        // Rejecting `c = false` forces `c`, hence `am`, hence no `lighton`.
        let mut s = Solver::init(&p).unwrap();
        s.set_callbacks(OnlineCallbacks {
            on_constraint_literals_extended: Box::new(move |_, current| {
                if current.contains(&(c, false)) {
                    TheoryResponse::Conflict(vec![(c, false)])
                } else {
                    TheoryResponse::Ok
                }
            }),
        });
        assert_eq!(s.solve(), SolveOutcome::Unsat);

        // Rejecting `c = true` changes nothing: the model already has ¬c.
        let mut s = Solver::init(&p).unwrap();
        s.set_callbacks(OnlineCallbacks {
            on_constraint_literals_extended: Box::new(move |_, current| {
                if current.contains(&(c, true)) {
                    TheoryResponse::Conflict(vec![(c, true)])
                } else {
                    TheoryResponse::Ok
                }
            }),
        });
        let SolveOutcome::Sat(m) = s.solve() else { panic!("expected sat") };
        assert!(!m.value(c));
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let text = "{a}. {b}. {c}. p :- a, not b. q :- b, not c. :- p, q.";
        let p = parse_program(text).unwrap();
        let (m1, s1) = enumerate_retained(&p);
        let (m2, s2) = enumerate_retained(&p);
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn learned_clauses_survive_falsum_additions() {
        let p = parse_program("{a}. {b}. {c}. {d}.").unwrap();
        let (models, stats) = enumerate_retained(&p);
        assert_eq!(models.len(), 16);
        // Every blocking conflict leaves a learned clause behind.
        assert!(stats.learned_count > 0);
    }

    #[test]
    fn expired_deadline_reports_budget() {
        let p = parse_program("{a}. {b}.").unwrap();
        let mut s = Solver::init(&p).unwrap();
        s.set_deadline(Some(Instant::now() - std::time::Duration::from_millis(1)));
        assert_eq!(s.solve(), SolveOutcome::Budget);
    }

    #[test]
    fn empty_falsum_rule_makes_solver_unsat() {
        let p = parse_program("{a}.").unwrap();
        let mut s = Solver::init(&p).unwrap();
        s.add_falsum_rules(&[Rule::falsum(vec![], vec![])]);
        assert_eq!(s.solve(), SolveOutcome::Unsat);
    }

    #[test]
    fn luby_prefix_is_correct() {
        let want = [1u64, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
        let got: Vec<u64> = (0..want.len() as u64).map(luby).collect();
        assert_eq!(got, want);
    }
}
