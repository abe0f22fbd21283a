//! troika: a miniature constraint answer set solver.
//!
//! The solver couples a CDCL-style propositional search over the Clark
//! completion of a ground program (with loop-formula refinement for
//! non-tight programs) with a bounds-consistency solver for linear
//! constraints over bounded integer variables. Constraint atoms appearing
//! in the program map to constraints through the `gamma` table; a negative
//! constraint literal contributes the complement of its atom's constraint.
//!
//! Three integration schemas connect the two solvers:
//!
//! * **black box** — every candidate model is produced by a fresh base
//!   solver instance; rejected candidates are excluded by blocking rules
//!   re-added to the next instance,
//! * **grey box** — one incremental base solver instance accepts blocking
//!   rules between solves and keeps its learned clauses and heuristic
//!   state,
//! * **clear box** — the base solver calls back into the theory solver at
//!   every propagation fixpoint that fixed new constraint literals, so
//!   theory conflicts prune the search while candidates are still partial.
//!
//! The [`benchmarks`] module provides generators, encoders, and verifiers
//! for three scheduling/packing-flavoured domains used to compare the
//! schemas; the `troika` binary in the companion CLI crate drives them.

// Index loops here usually range over semantic ids (atom ids, job ids,
// time steps) that name several parallel tables at once; enumerate/zip
// rewrites would arbitrarily privilege one table.
#![allow(clippy::needless_range_loop)]

pub mod base;
pub mod benchmarks;
pub mod integration;
pub mod program;
pub mod theory;

#[doc(hidden)]
pub mod testgen;

pub use base::{BaseStats, OnlineCallbacks, SolveOutcome, Solver, TheoryResponse};
pub use benchmarks::{generate, Domain, Encoding, Instance, SolutionFile};
pub use integration::{
    enumerate_all, solve_black, solve_clear, solve_grey, solve_with_schema, BlockingMode,
    CaspOutcome, CaspSolution, Enumeration, RunStats, Schema, SolveConfig,
};
pub use program::{
    parse_program, AtomId, AtomKind, CandidateModel, Head, ParseError, Program, Rule, VarDecl,
    VarId,
};
pub use theory::{
    gamma, minimize_core, solve_constraints, ConstraintExpr, Evaluation, Rel, TheoryStatus,
    TheoryVerdict,
};
