//! Benchmark domains: instance generators, program encoders, and
//! independent solution verifiers.
//!
//! Three domains exercise different mixes of propositional structure and
//! arithmetic:
//!
//! * [`wseq`] — weighted sequence: order a set of weighted leaves and
//!   color every position but the first; the coloring decides each
//!   position's cost and the total must stay within a bound.
//! * [`is`] — incremental scheduling: place jobs on device instances and
//!   pick integer start times under precedences, an availability map, and
//!   a bound on total weighted tardiness.
//! * [`rf`] — reverse folding: transform a chain of unit segments in the
//!   plane into a goal configuration with exactly `t` pivot moves, no two
//!   segments ever colliding.
//!
//! Every domain offers up to three encodings of the same instance
//! ([`Encoding`]): from fully grounded (`pure-asp`) to
//! constraint-variable-heavy (`pure-csp`), with `true-casp` in between.
//! Reverse folding admits no `pure-csp` encoding. The encodings are
//! answer-set-count preserving: models correspond one to one to domain
//! decisions, so enumeration counts can be compared across encodings.
//!
//! Verifiers deliberately reimplement the domain rules from the instance
//! data alone — they never consult the encoders — so a verified solution
//! is evidence against encoder and solver alike.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::integration::CaspSolution;
use crate::program::{AtomId, Program, Rule, VarId};
use crate::theory::{ConstraintExpr, Rel};

pub mod is;
pub mod rf;
pub mod wseq;

pub use is::IsInstance;
pub use rf::RfInstance;
pub use wseq::WseqInstance;

/// Benchmark domain selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Wseq,
    Is,
    Rf,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Wseq, Domain::Is, Domain::Rf];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Wseq => "wseq",
            Domain::Is => "is",
            Domain::Rf => "rf",
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wseq" => Ok(Domain::Wseq),
            "is" => Ok(Domain::Is),
            "rf" => Ok(Domain::Rf),
            other => Err(format!("unknown domain `{other}` (expected wseq|is|rf)")),
        }
    }
}

/// How much of the domain lives in constraint atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    PureAsp,
    TrueCasp,
    PureCsp,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::PureAsp, Encoding::TrueCasp, Encoding::PureCsp];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::PureAsp => "pure-asp",
            Encoding::TrueCasp => "true-casp",
            Encoding::PureCsp => "pure-csp",
        }
    }

    /// Reverse folding has no workable pure-CSP formulation.
    pub fn supports(self, domain: Domain) -> bool {
        !(domain == Domain::Rf && self == Encoding::PureCsp)
    }
}

impl std::fmt::Display for Encoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pure-asp" => Ok(Encoding::PureAsp),
            "true-casp" => Ok(Encoding::TrueCasp),
            "pure-csp" => Ok(Encoding::PureCsp),
            other => Err(format!(
                "unknown encoding `{other}` (expected pure-asp|true-casp|pure-csp)"
            )),
        }
    }
}

/// Errors shared by the domain operations.
#[derive(Debug, thiserror::Error)]
pub enum DomainError {
    #[error("domain `{domain}` does not support encoding `{encoding}`")]
    UnsupportedEncoding { domain: Domain, encoding: Encoding },
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("malformed instance: {0}")]
    BadInstance(String),
}

/// An instance of any domain, as stored in instance JSON files. The
/// `domain` tag selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain")]
pub enum Instance {
    #[serde(rename = "wseq")]
    Wseq(WseqInstance),
    #[serde(rename = "is")]
    Is(IsInstance),
    #[serde(rename = "rf")]
    Rf(RfInstance),
}

impl Instance {
    pub fn domain(&self) -> Domain {
        match self {
            Instance::Wseq(_) => Domain::Wseq,
            Instance::Is(_) => Domain::Is,
            Instance::Rf(_) => Domain::Rf,
        }
    }

    /// Short deterministic label used in reports, e.g. `wseq-n4-s1`.
    pub fn label(&self) -> String {
        match self {
            Instance::Wseq(i) => format!("wseq-n{}-s{}", i.leaves.len(), i.seed),
            Instance::Is(i) => format!("is-j{}-s{}", i.jobs.len(), i.seed),
            Instance::Rf(i) => format!("rf-n{}-t{}-s{}", i.n_segments, i.t_moves, i.seed),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            Instance::Wseq(i) => i.validate(),
            Instance::Is(i) => i.validate(),
            Instance::Rf(i) => i.validate(),
        }
    }

    /// Encode under the requested encoding.
    pub fn encode(&self, encoding: Encoding) -> Result<Program, DomainError> {
        if !encoding.supports(self.domain()) {
            return Err(DomainError::UnsupportedEncoding { domain: self.domain(), encoding });
        }
        self.validate()?;
        Ok(match self {
            Instance::Wseq(i) => wseq::encode(i, encoding),
            Instance::Is(i) => is::encode(i, encoding),
            Instance::Rf(i) => rf::encode(i, encoding),
        })
    }

    /// Decode a solver solution and check it against the domain rules.
    /// `Ok` means the solution is genuinely valid for this instance.
    pub fn verify(&self, sol: &SolutionFile) -> Result<(), String> {
        match self {
            Instance::Wseq(i) => wseq::verify(i, &wseq::decode(i, sol)?),
            Instance::Is(i) => is::verify(i, &is::decode(i, sol)?),
            Instance::Rf(i) => rf::verify(i, &rf::decode(i, sol)?),
        }
    }

    /// A canonical fingerprint of the domain decision a solution makes,
    /// independent of the encoding that produced it. Used to compare
    /// enumerations across encodings.
    pub fn project(&self, sol: &SolutionFile) -> Result<String, String> {
        match self {
            Instance::Wseq(i) => Ok(format!("{:?}", wseq::decode(i, sol)?)),
            Instance::Is(i) => Ok(format!("{:?}", is::decode(i, sol)?)),
            Instance::Rf(i) => Ok(format!("{:?}", rf::decode(i, sol)?)),
        }
    }
}

/// Generate an instance. `t` is only meaningful for reverse folding
/// (number of moves); the other domains ignore it.
pub fn generate(domain: Domain, n: usize, t: usize, seed: u64) -> Result<Instance, DomainError> {
    Ok(match domain {
        Domain::Wseq => Instance::Wseq(wseq::gen(n, seed)?),
        Domain::Is => Instance::Is(is::gen(n, seed)?),
        Domain::Rf => Instance::Rf(rf::gen(n, t, seed)?),
    })
}

/// Solver output in the on-disk solution format: the propositional part
/// as true atom names, the witness as a name→value map, and (for reverse
/// folding) an optional explicit move list. Verifiers accept either the
/// explicit moves or the `pivot_*` atoms.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolutionFile {
    pub result: String,
    #[serde(default)]
    pub true_atoms: Vec<String>,
    #[serde(default)]
    pub assignments: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moves: Vec<Move>,
}

/// One pivot move for the reverse-folding domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub step: usize,
    pub segment: usize,
    pub dir: Dir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dir {
    Cw,
    Ccw,
}

impl Dir {
    pub fn token(self) -> &'static str {
        match self {
            Dir::Cw => "cw",
            Dir::Ccw => "ccw",
        }
    }
}

/// Package a solver solution as a [`SolutionFile`].
pub fn solution_file(p: &Program, sol: &CaspSolution) -> SolutionFile {
    SolutionFile {
        result: "sat".to_string(),
        true_atoms: sol.model.true_names(p).iter().map(|s| s.to_string()).collect(),
        assignments: sol
            .witness
            .named(&p.decls)
            .map(|(name, v)| (name.to_string(), v))
            .collect(),
        moves: vec![],
    }
}

// ---- shared encoding building blocks ----
//
// The decision structure of every domain reduces to "exactly one of these
// atoms is true" cells plus forced constraint atoms. Keeping the rule
// shapes here guarantees all encodings pin their atoms the same way: a
// constraint atom is either forced true by a scaffolding rule or provably
// has a unique consistent value under any witness, so the propositional
// models stay in one-to-one correspondence with domain decisions.

/// `⊥ ← not a₁, …, not aₖ` — at least one of `atoms` holds.
pub(crate) fn at_least_one(p: &mut Program, atoms: &[AtomId]) {
    p.rules.push(Rule::falsum(vec![], atoms.to_vec()));
}

/// Pairwise `⊥ ← aᵢ, aⱼ` — at most one of `atoms` holds.
pub(crate) fn at_most_one(p: &mut Program, atoms: &[AtomId]) {
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            p.rules.push(Rule::falsum(vec![atoms[i], atoms[j]], vec![]));
        }
    }
}

pub(crate) fn exactly_one(p: &mut Program, atoms: &[AtomId]) {
    at_least_one(p, atoms);
    at_most_one(p, atoms);
}

/// `⊥ ← not a` — the atom must hold in every answer set.
pub(crate) fn force_true(p: &mut Program, a: AtomId) {
    p.rules.push(Rule::falsum(vec![], vec![a]));
}

/// `⊥ ← cond₁, …, condₖ, not a` — under the condition, `a` must hold.
pub(crate) fn force_if(p: &mut Program, cond: Vec<AtomId>, a: AtomId) {
    p.rules.push(Rule::falsum(cond, vec![a]));
}

/// Constraint atom `v #= k`.
pub(crate) fn var_eq(p: &mut Program, v: VarId, k: i64) -> AtomId {
    p.intern_constraint_atom(ConstraintExpr::new(vec![(1, Some(v))], Rel::Eq, vec![(k, None)]))
}

/// Constraint atom `Σ terms #rel k`.
pub(crate) fn linear(
    p: &mut Program,
    terms: Vec<(i64, VarId)>,
    rel: Rel,
    k: i64,
) -> AtomId {
    let lhs = terms.into_iter().map(|(c, v)| (c, Some(v))).collect();
    p.intern_constraint_atom(ConstraintExpr::new(lhs, rel, vec![(k, None)]))
}
