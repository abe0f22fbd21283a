//! The three integration schemas that couple the base solver and the
//! theory solver into a full CASP decision procedure.
//!
//! * [`solve_black`] — *black box*: every candidate model comes from a
//!   fresh base-solver instance built over `Π^C` plus all blocking rules
//!   accumulated so far; a theory-rejected candidate adds one more
//!   blocking rule and the loop restarts from scratch.
//! * [`solve_grey`] — *grey box*: the same candidate/check loop, but a
//!   single incremental instance receives the blocking rules between
//!   solves, so learned clauses, activities, and saved phases carry over.
//! * [`solve_clear`] — *clear box*: a single instance runs with a theory
//!   callback installed; at every propagation fixpoint that fixed new
//!   constraint literals the currently assigned constraint literals are
//!   checked, and an unsatisfiable verdict is injected as a conflict so
//!   the search backjumps long before the candidate is total.
//!
//! All three agree on satisfiability; they differ only in how much work
//! is recycled between candidates, which is what [`RunStats`] measures.

use std::cell::RefCell;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::base::{OnlineCallbacks, SolveOutcome, Solver, TheoryResponse};
use crate::base::BaseStats;
use crate::program::{AtomId, CandidateModel, Program, Rule};
use crate::theory::{check_literals, gamma, minimize_core, Evaluation};

/// Which integration schema to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Black,
    Grey,
    Clear,
}

impl Schema {
    pub const ALL: [Schema; 3] = [Schema::Black, Schema::Grey, Schema::Clear];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Black => "black",
            Schema::Grey => "grey",
            Schema::Clear => "clear",
        }
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "black" => Ok(Schema::Black),
            "grey" => Ok(Schema::Grey),
            "clear" => Ok(Schema::Clear),
            other => Err(format!("unknown schema `{other}` (expected black|grey|clear)")),
        }
    }
}

/// What a blocking rule excludes after a theory rejection: the entire
/// candidate, or just its constraint-literal projection (which rules out
/// the whole theory-equivalence class at once).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingMode {
    Model,
    Theory,
}

impl BlockingMode {
    pub fn name(self) -> &'static str {
        match self {
            BlockingMode::Model => "model",
            BlockingMode::Theory => "theory",
        }
    }
}

impl std::fmt::Display for BlockingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BlockingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "model" => Ok(BlockingMode::Model),
            "theory" => Ok(BlockingMode::Theory),
            other => Err(format!("unknown blocking mode `{other}` (expected model|theory)")),
        }
    }
}

/// Knobs shared by every solve entry point.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub schema: Schema,
    pub blocking: BlockingMode,
    /// Shrink theory conflicts to a 1-minimal core before blocking or
    /// injecting them.
    pub minimize_core: bool,
    pub budget: Option<Duration>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            schema: Schema::Black,
            blocking: BlockingMode::Theory,
            minimize_core: false,
            budget: None,
        }
    }
}

impl SolveConfig {
    pub fn with_schema(schema: Schema) -> Self {
        SolveConfig { schema, ..SolveConfig::default() }
    }
}

/// Counters for one solve or enumeration run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    /// Base-solver counters; summed over instances for the black box.
    pub base: BaseStats,
    /// Total candidate models the base solver proposed.
    pub candidates: u64,
    /// Invocations of the constraint decision procedure.
    pub theory_calls: u64,
    /// How many of those returned unsat.
    pub theory_conflicts: u64,
    /// Fresh base-solver handles created.
    pub base_instantiations: u64,
    pub wall_ms: u64,
    /// `learned_count` observed after each candidate, in order. For the
    /// grey box this must never decrease (clauses are retained).
    #[serde(skip)]
    pub learned_trace: Vec<u64>,
}

impl RunStats {
    /// Flat name/value view, in a fixed order, for tables and reports.
    pub fn flat(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("decisions", self.base.decisions),
            ("propagations", self.base.propagations),
            ("conflicts", self.base.conflicts),
            ("restarts", self.base.restarts),
            ("learned_count", self.base.learned_count),
            ("callback_calls", self.base.callback_calls),
            ("candidates", self.candidates),
            ("theory_calls", self.theory_calls),
            ("theory_conflicts", self.theory_conflicts),
            ("base_instantiations", self.base_instantiations),
            ("wall_ms", self.wall_ms),
        ]
    }
}

/// One answer set together with a witness evaluation of the constraint
/// variables. When the model fixes no constraint literals the witness is
/// the all-lower-bounds evaluation (any evaluation works).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaspSolution {
    pub model: CandidateModel,
    pub witness: Evaluation,
}

/// Result of a single-solution solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaspOutcome {
    Sat(CaspSolution),
    Unsat,
    /// The wall-clock budget expired first.
    Budget,
}

/// Result of [`enumerate_all`].
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub solutions: Vec<CaspSolution>,
    /// False when the budget expired before the space was exhausted.
    pub complete: bool,
    pub stats: RunStats,
}

fn default_witness(p: &Program) -> Evaluation {
    Evaluation(p.decls.iter().map(|d| d.lo).collect())
}

fn deadline_of(cfg: &SolveConfig, start: Instant) -> Option<Instant> {
    cfg.budget.map(|b| start.checked_add(b).expect("budget overflows the clock"))
}

fn over(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Blocking rule `⊥ ← l1, …, lk` falsified exactly by assignments that
/// agree with `lits`.
fn blocking_rule(lits: &[(AtomId, bool)]) -> Rule {
    let pos = lits.iter().filter(|l| l.1).map(|l| l.0).collect();
    let neg = lits.iter().filter(|l| !l.1).map(|l| l.0).collect();
    Rule::falsum(pos, neg)
}

fn full_model_literals(p: &Program, m: &CandidateModel) -> Vec<(AtomId, bool)> {
    p.atom_ids_iter().map(|a| (a, m.value(a))).collect()
}

fn debug_check_solution(p: &Program, sol: &CaspSolution) {
    debug_assert!(
        p.is_answer_set(&sol.model, &mut |lits| check_literals(p, lits).is_sat()),
        "returned model is not an answer set"
    );
    debug_assert!(
        sol.model.constraint_literals(p).iter().all(|&l| gamma(p, l).eval(&sol.witness)),
        "witness does not satisfy the model's constraint literals"
    );
}

/// Theory-check a total candidate. `Ok` carries the accepted solution;
/// `Err` carries the literals to block (per the configured mode).
fn judge_candidate(
    p: &Program,
    m: CandidateModel,
    cfg: &SolveConfig,
    stats: &mut RunStats,
) -> Result<CaspSolution, Vec<(AtomId, bool)>> {
    stats.candidates += 1;
    let lits = m.constraint_literals(p);
    if lits.is_empty() {
        // Vacuously theory-satisfiable; no call is made or counted.
        return Ok(CaspSolution { model: m, witness: default_witness(p) });
    }
    stats.theory_calls += 1;
    let verdict = check_literals(p, &lits);
    if let Some(witness) = verdict.witness {
        return Ok(CaspSolution { model: m, witness });
    }
    stats.theory_conflicts += 1;
    let blocked = match cfg.blocking {
        BlockingMode::Model => full_model_literals(p, &m),
        BlockingMode::Theory => {
            if cfg.minimize_core {
                minimize_core(p, &lits).expect("verdict was unsat")
            } else {
                lits
            }
        }
    };
    Err(blocked)
}

/// Black box: one fresh base-solver instance per candidate.
pub fn solve_black(p: &Program, cfg: &SolveConfig) -> (CaspOutcome, RunStats) {
    let start = Instant::now();
    let deadline = deadline_of(cfg, start);
    let pc = p.extend_with_choices();
    let mut stats = RunStats::default();
    let mut blocked: Vec<Rule> = vec![];
    let outcome = loop {
        if over(deadline) {
            break CaspOutcome::Budget;
        }
        let mut s = Solver::init(&pc).expect("extended program is valid");
        stats.base_instantiations += 1;
        s.set_deadline(deadline);
        s.add_falsum_rules(&blocked);
        let out = s.solve();
        stats.base.add(&s.stats());
        match out {
            SolveOutcome::Unsat => break CaspOutcome::Unsat,
            SolveOutcome::Budget => break CaspOutcome::Budget,
            SolveOutcome::Sat(m) => {
                stats.learned_trace.push(stats.base.learned_count);
                match judge_candidate(p, m, cfg, &mut stats) {
                    Ok(sol) => {
                        debug_check_solution(p, &sol);
                        break CaspOutcome::Sat(sol);
                    }
                    Err(lits) => blocked.push(blocking_rule(&lits)),
                }
            }
        }
    };
    stats.wall_ms = start.elapsed().as_millis() as u64;
    (outcome, stats)
}

/// Grey box: one incremental instance, blocking rules added between
/// solves, learned clauses retained throughout.
pub fn solve_grey(p: &Program, cfg: &SolveConfig) -> (CaspOutcome, RunStats) {
    let start = Instant::now();
    let deadline = deadline_of(cfg, start);
    let pc = p.extend_with_choices();
    let mut stats = RunStats::default();
    let mut s = Solver::init(&pc).expect("extended program is valid");
    stats.base_instantiations = 1;
    s.set_deadline(deadline);
    let outcome = loop {
        match s.solve() {
            SolveOutcome::Unsat => break CaspOutcome::Unsat,
            SolveOutcome::Budget => break CaspOutcome::Budget,
            SolveOutcome::Sat(m) => {
                stats.learned_trace.push(s.stats().learned_count);
                match judge_candidate(p, m, cfg, &mut stats) {
                    Ok(sol) => {
                        debug_check_solution(p, &sol);
                        break CaspOutcome::Sat(sol);
                    }
                    Err(lits) => s.add_falsum_rules(&[blocking_rule(&lits)]),
                }
            }
        }
    };
    stats.base = s.stats();
    stats.wall_ms = start.elapsed().as_millis() as u64;
    (outcome, stats)
}

/// Shared clear-box plumbing: build the solver with the theory callback
/// installed and run `body` with it.
fn with_clear_solver<R>(
    p: &Program,
    cfg: &SolveConfig,
    deadline: Option<Instant>,
    body: impl FnOnce(&mut Solver<'_>, &RefCell<(u64, u64)>) -> R,
) -> R {
    // (theory_calls, theory_conflicts) seen by the callback.
    let counters = RefCell::new((0u64, 0u64));
    let counters_ref = &counters;
    let minimize = cfg.minimize_core;
    let pc = p.extend_with_choices();
    let mut s = Solver::init(&pc).expect("extended program is valid");
    s.set_deadline(deadline);
    s.set_callbacks(OnlineCallbacks {
        on_constraint_literals_extended: Box::new(move |_newly, current| {
            let mut c = counters_ref.borrow_mut();
            c.0 += 1;
            let verdict = check_literals(p, current);
            if verdict.is_sat() {
                return TheoryResponse::Ok;
            }
            c.1 += 1;
            let core = if minimize {
                minimize_core(p, current).expect("verdict was unsat")
            } else {
                let idx = verdict.core.expect("unsat verdict carries a core");
                idx.into_iter().map(|i| current[i]).collect()
            };
            TheoryResponse::Conflict(core)
        }),
    });
    body(&mut s, &counters)
}

/// Clear box: theory checks run on partial assignments during search; a
/// model that survives to totality has already passed a check with every
/// constraint literal assigned, so the final confirmation must succeed.
pub fn solve_clear(p: &Program, cfg: &SolveConfig) -> (CaspOutcome, RunStats) {
    let start = Instant::now();
    let deadline = deadline_of(cfg, start);
    let mut stats = RunStats { base_instantiations: 1, ..RunStats::default() };
    let outcome = with_clear_solver(p, cfg, deadline, |s, counters| {
        let out = s.solve();
        let result = match out {
            SolveOutcome::Unsat => CaspOutcome::Unsat,
            SolveOutcome::Budget => CaspOutcome::Budget,
            SolveOutcome::Sat(m) => {
                stats.candidates += 1;
                stats.learned_trace.push(s.stats().learned_count);
                let sol = confirm_clear_model(p, m, &mut stats);
                debug_check_solution(p, &sol);
                CaspOutcome::Sat(sol)
            }
        };
        let (calls, conflicts) = *counters.borrow();
        stats.theory_calls += calls;
        stats.theory_conflicts += conflicts;
        stats.base = s.stats();
        result
    });
    stats.wall_ms = start.elapsed().as_millis() as u64;
    (outcome, stats)
}

/// Final confirmation of a clear-box model. The callback already vetted
/// the full constraint-literal set on this branch, so failure here would
/// mean the integration is broken — hence the hard assert.
fn confirm_clear_model(p: &Program, m: CandidateModel, stats: &mut RunStats) -> CaspSolution {
    let lits = m.constraint_literals(p);
    if lits.is_empty() {
        return CaspSolution { model: m, witness: default_witness(p) };
    }
    stats.theory_calls += 1;
    let verdict = check_literals(p, &lits);
    let witness = verdict
        .witness
        .expect("clear-box final confirmation rejected a callback-vetted model");
    CaspSolution { model: m, witness }
}

/// Dispatch on `cfg.schema`.
pub fn solve_with_schema(p: &Program, cfg: &SolveConfig) -> (CaspOutcome, RunStats) {
    match cfg.schema {
        Schema::Black => solve_black(p, cfg),
        Schema::Grey => solve_grey(p, cfg),
        Schema::Clear => solve_clear(p, cfg),
    }
}

/// Enumerate every answer set under the configured schema. Blocking is
/// forced to full-model mode so each step excludes exactly one model and
/// the result is the complete, duplicate-free list of answer sets.
pub fn enumerate_all(p: &Program, cfg: &SolveConfig) -> Enumeration {
    let start = Instant::now();
    let deadline = deadline_of(cfg, start);
    let ecfg = SolveConfig { blocking: BlockingMode::Model, ..cfg.clone() };
    let mut en = match ecfg.schema {
        Schema::Black => enumerate_black(p, &ecfg, deadline),
        Schema::Grey => enumerate_lazy_retained(p, &ecfg, deadline),
        Schema::Clear => enumerate_clear(p, &ecfg, deadline),
    };
    en.stats.wall_ms = start.elapsed().as_millis() as u64;
    if cfg!(debug_assertions) {
        for sol in &en.solutions {
            debug_check_solution(p, sol);
        }
    }
    en
}

fn enumerate_black(p: &Program, cfg: &SolveConfig, deadline: Option<Instant>) -> Enumeration {
    let pc = p.extend_with_choices();
    let mut stats = RunStats::default();
    let mut solutions = vec![];
    let mut blocked: Vec<Rule> = vec![];
    let complete = loop {
        if over(deadline) {
            break false;
        }
        let mut s = Solver::init(&pc).expect("extended program is valid");
        stats.base_instantiations += 1;
        s.set_deadline(deadline);
        s.add_falsum_rules(&blocked);
        let out = s.solve();
        stats.base.add(&s.stats());
        match out {
            SolveOutcome::Unsat => break true,
            SolveOutcome::Budget => break false,
            SolveOutcome::Sat(m) => {
                stats.learned_trace.push(stats.base.learned_count);
                blocked.push(blocking_rule(&full_model_literals(p, &m)));
                if let Ok(sol) = judge_candidate(p, m, cfg, &mut stats) {
                    solutions.push(sol);
                }
            }
        }
    };
    Enumeration { solutions, complete, stats }
}

fn enumerate_lazy_retained(
    p: &Program,
    cfg: &SolveConfig,
    deadline: Option<Instant>,
) -> Enumeration {
    let pc = p.extend_with_choices();
    let mut stats = RunStats::default();
    let mut solutions = vec![];
    let mut s = Solver::init(&pc).expect("extended program is valid");
    stats.base_instantiations = 1;
    s.set_deadline(deadline);
    let complete = loop {
        match s.solve() {
            SolveOutcome::Unsat => break true,
            SolveOutcome::Budget => break false,
            SolveOutcome::Sat(m) => {
                stats.learned_trace.push(s.stats().learned_count);
                s.add_falsum_rules(&[blocking_rule(&full_model_literals(p, &m))]);
                if let Ok(sol) = judge_candidate(p, m, cfg, &mut stats) {
                    solutions.push(sol);
                }
            }
        }
    };
    stats.base = s.stats();
    Enumeration { solutions, complete, stats }
}

fn enumerate_clear(p: &Program, cfg: &SolveConfig, deadline: Option<Instant>) -> Enumeration {
    let mut stats = RunStats { base_instantiations: 1, ..RunStats::default() };
    let mut solutions = vec![];
    let complete = with_clear_solver(p, cfg, deadline, |s, counters| {
        let complete = loop {
            match s.solve() {
                SolveOutcome::Unsat => break true,
                SolveOutcome::Budget => break false,
                SolveOutcome::Sat(m) => {
                    stats.candidates += 1;
                    stats.learned_trace.push(s.stats().learned_count);
                    s.add_falsum_rules(&[blocking_rule(&full_model_literals(p, &m))]);
                    let sol = confirm_clear_model(p, m, &mut stats);
                    solutions.push(sol);
                }
            }
        };
        let (calls, conflicts) = *counters.borrow();
        stats.theory_calls += calls;
        stats.theory_conflicts += conflicts;
        stats.base = s.stats();
        complete
    });
    Enumeration { solutions, complete, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::theory::TheoryStatus;

    const LIGHT_SWITCH: &str =
        "#var x 0..24. am :- x #< 12. lighton :- switch, not am. {switch}. :- not lighton.";

    fn oracle_models(p: &Program) -> Vec<CandidateModel> {
        p.enumerate_answer_sets_oracle(&mut |lits| check_literals(p, lits).is_sat())
            .unwrap()
    }

    #[test]
    fn light_switch_agrees_across_schemas() {
        let p = parse_program(LIGHT_SWITCH).unwrap();
        let c = p.atom_id("x #< 12").unwrap();
        for schema in Schema::ALL {
            let cfg = SolveConfig::with_schema(schema);
            let (out, stats) = solve_with_schema(&p, &cfg);
            let CaspOutcome::Sat(sol) = out else { panic!("{schema}: expected sat") };
            assert_eq!(sol.model.true_names(&p), vec!["lighton", "switch"], "{schema}");
            assert!(!sol.model.value(c), "{schema}: constraint literal must be negative");
            let x = sol.witness.value(p.var_id("x").unwrap());
            assert!((12..=24).contains(&x), "{schema}: witness {x} out of range");
            match schema {
                Schema::Black => {
                    assert_eq!(stats.candidates, 1, "{schema}");
                    assert_eq!(stats.theory_calls, 1, "{schema}");
                    assert_eq!(stats.base_instantiations, 1, "{schema}");
                }
                Schema::Grey => assert_eq!(stats.base_instantiations, 1),
                Schema::Clear => {
                    assert_eq!(stats.base_instantiations, 1);
                    assert!(stats.base.callback_calls >= 1);
                }
            }
            assert!(stats.theory_conflicts <= stats.theory_calls);
        }
    }

    #[test]
    fn light_switch_enumeration_is_singleton() {
        let p = parse_program(LIGHT_SWITCH).unwrap();
        for schema in Schema::ALL {
            let en = enumerate_all(&p, &SolveConfig::with_schema(schema));
            assert!(en.complete);
            assert_eq!(en.solutions.len(), 1, "{schema}");
        }
    }

    #[test]
    fn forced_unsatisfiable_constraint_atom() {
        // γ(c) = (x < 0) over x ∈ [0,4]; c is forced, so the theory must
        // reject the single candidate and blocking must close the space.
        let p = parse_program("#var x 0..4. :- not x #< 0.").unwrap();
        let (out, stats) = solve_black(&p, &SolveConfig::with_schema(Schema::Black));
        assert_eq!(out, CaspOutcome::Unsat);
        assert_eq!(stats.candidates, 1);
        assert_eq!(stats.theory_calls, 1);
        assert_eq!(stats.theory_conflicts, 1);
        assert_eq!(stats.base_instantiations, 2);

        let (out, stats) = solve_grey(&p, &SolveConfig::with_schema(Schema::Grey));
        assert_eq!(out, CaspOutcome::Unsat);
        assert_eq!(stats.candidates, 1);
        assert_eq!(stats.base_instantiations, 1);

        let (out, stats) = solve_clear(&p, &SolveConfig::with_schema(Schema::Clear));
        assert_eq!(out, CaspOutcome::Unsat);
        assert!(stats.theory_conflicts >= 1);
        assert!(stats.theory_conflicts <= stats.theory_calls);
        assert_eq!(stats.base_instantiations, 1);
    }

    #[test]
    fn pure_asp_program_makes_no_theory_calls() {
        let p = parse_program("{a}. b :- a. :- not b.").unwrap();
        for schema in Schema::ALL {
            let (out, stats) = solve_with_schema(&p, &SolveConfig::with_schema(schema));
            assert!(matches!(out, CaspOutcome::Sat(_)), "{schema}");
            assert_eq!(stats.theory_calls, 0, "{schema}");
            assert_eq!(stats.theory_conflicts, 0, "{schema}");
        }
    }

    #[test]
    fn free_constraint_atom_enumeration_counts() {
        // c = (x ≥ 0) is forced true; `a` stays free: exactly 2 answer sets.
        let p = parse_program("#var x 0..4. {a}. :- not x #>= 0.").unwrap();
        for schema in Schema::ALL {
            let en = enumerate_all(&p, &SolveConfig::with_schema(schema));
            assert!(en.complete);
            assert_eq!(en.solutions.len(), 2, "{schema}");
            assert_eq!(en.stats.base_instantiations > 1, schema == Schema::Black);
        }
    }

    #[test]
    fn enumeration_equals_oracle_on_mixed_programs() {
        for text in [
            "#var x 0..3. a :- x #< 2. b :- not a. {c}. :- c, b.",
            "#var u 0..2. #var v 0..2. p :- u #= v. {q}. r :- q, not p.",
            "#var w -2..2. {s}. t :- s, w #> 0. :- t.",
            "{a}. {b}. c :- a, b.",
            "#var x 0..4. :- not x #< 0.",
        ] {
            let p = parse_program(text).unwrap();
            let mut want = oracle_models(&p);
            want.sort();
            for schema in Schema::ALL {
                let en = enumerate_all(&p, &SolveConfig::with_schema(schema));
                assert!(en.complete, "{schema} on {text}");
                let mut got: Vec<CandidateModel> =
                    en.solutions.into_iter().map(|s| s.model).collect();
                got.sort();
                assert_eq!(got, want, "{schema} on {text}");
            }
        }
    }

    #[test]
    fn blocking_modes_agree_on_status() {
        let texts = [
            "#var x 0..4. :- not x #< 0.",
            "#var x 0..9. {a}. b :- x #>= 5, a. :- not b.",
            "#var x 0..3. #var y 0..3. p :- x #< y. :- not p. :- not x #> 2.",
        ];
        for text in texts {
            let p = parse_program(text).unwrap();
            for schema in [Schema::Black, Schema::Grey] {
                let model = SolveConfig {
                    schema,
                    blocking: BlockingMode::Model,
                    ..SolveConfig::default()
                };
                let theory = SolveConfig {
                    schema,
                    blocking: BlockingMode::Theory,
                    ..SolveConfig::default()
                };
                let (a, _) = solve_with_schema(&p, &model);
                let (b, _) = solve_with_schema(&p, &theory);
                assert_eq!(
                    matches!(a, CaspOutcome::Sat(_)),
                    matches!(b, CaspOutcome::Sat(_)),
                    "{schema} on {text}"
                );
            }
        }
    }

    #[test]
    fn core_minimization_blocks_more_per_rejection() {
        // c1 = (x < 0) is individually unsat and forced true; c2 = (y ≥ 0)
        // rides along freely (either polarity is satisfiable on its own).
        // Minimized cores block c1 alone, so the second candidate
        // (flipping c2) never needs proposing.
        let text = "#var x 0..4. #var y -4..4. :- not x #< 0. p :- y #>= 0.";
        let p = parse_program(text).unwrap();
        let plain = SolveConfig { minimize_core: false, ..SolveConfig::default() };
        let minimized = SolveConfig { minimize_core: true, ..SolveConfig::default() };
        let (out_a, stats_a) = solve_black(&p, &plain);
        let (out_b, stats_b) = solve_black(&p, &minimized);
        assert_eq!(out_a, CaspOutcome::Unsat);
        assert_eq!(out_b, CaspOutcome::Unsat);
        assert!(
            stats_b.candidates < stats_a.candidates,
            "minimized cores should prune the candidate space faster: {} vs {}",
            stats_b.candidates,
            stats_a.candidates
        );
    }

    #[test]
    fn grey_learned_count_is_monotone() {
        let p = parse_program(
            "#var x 0..6. {a}. {b}. c :- a, x #< 3. d :- b, x #>= 3. :- not c. :- not d.",
        )
        .unwrap();
        let (out, stats) = solve_grey(&p, &SolveConfig::with_schema(Schema::Grey));
        assert_eq!(out, CaspOutcome::Unsat, "x cannot be both < 3 and ≥ 3");
        assert!(stats.candidates >= 1);
        assert!(stats.learned_trace.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_budget_reports_budget() {
        let p = parse_program("{a}. {b}.").unwrap();
        for schema in Schema::ALL {
            let cfg = SolveConfig {
                schema,
                budget: Some(Duration::ZERO),
                ..SolveConfig::default()
            };
            let (out, stats) = solve_with_schema(&p, &cfg);
            assert_eq!(out, CaspOutcome::Budget, "{schema}");
            assert!(stats.base_instantiations <= 1, "{schema}");
            let en = enumerate_all(&p, &cfg);
            assert!(!en.complete, "{schema}");
        }
    }

    #[test]
    fn identical_runs_differ_only_in_wall_ms() {
        let p = parse_program(
            "#var x 0..5. {a}. {b}. c :- a, not b, x #< 3. d :- b, x #>= 1. :- not c, not d.",
        )
        .unwrap();
        for schema in Schema::ALL {
            let cfg = SolveConfig::with_schema(schema);
            let (out1, mut s1) = solve_with_schema(&p, &cfg);
            let (out2, mut s2) = solve_with_schema(&p, &cfg);
            assert_eq!(out1, out2, "{schema}");
            s1.wall_ms = 0;
            s2.wall_ms = 0;
            assert_eq!(s1, s2, "{schema}");
        }
    }

    #[test]
    fn stats_flat_covers_report_columns() {
        let stats = RunStats::default();
        let names: Vec<&str> = stats.flat().into_iter().map(|(n, _)| n).collect();
        for needed in [
            "decisions",
            "conflicts",
            "candidates",
            "theory_calls",
            "theory_conflicts",
            "base_instantiations",
            "learned_count",
            "wall_ms",
        ] {
            assert!(names.contains(&needed), "missing {needed}");
        }
    }

    #[test]
    fn random_programs_agree_with_oracle_under_every_schema() {
        for seed in 0..60u64 {
            let p = crate::testgen::random_program(seed);
            let mut want = oracle_models(&p);
            want.sort();
            for schema in Schema::ALL {
                let en = enumerate_all(&p, &SolveConfig::with_schema(schema));
                assert!(en.complete, "{schema} hit a budget with none set");
                let mut got: Vec<CandidateModel> =
                    en.solutions.into_iter().map(|s| s.model).collect();
                got.sort();
                assert_eq!(
                    got,
                    want,
                    "{schema} diverges from the oracle on seed {seed}:\n{}",
                    p.to_text()
                );
            }
        }
    }

    #[test]
    fn verdict_status_matches_witness_presence() {
        let p = parse_program("#var x 0..4. :- not x #< 2.").unwrap();
        let lits = vec![(p.atom_id("x #< 2").unwrap(), true)];
        let v = check_literals(&p, &lits);
        assert_eq!(v.status, TheoryStatus::Sat);
        assert!(v.witness.is_some());
    }
}
