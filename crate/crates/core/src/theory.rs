//! Finite-domain solver for conjunctions of linear constraints.
//!
//! Constraints have the normalized shape `Σ cᵢ·xᵢ REL k` over variables
//! with declared integer bounds. Satisfiability is decided by
//! bounds-consistency propagation plus chronological backtracking with a
//! smallest-domain-first variable order and lowest-value-first splits —
//! complete on these finite domains, and deliberately simple: the point of
//! this solver is to be an honest theory oracle, not a fast CP engine.
//!
//! [`gamma`] maps a constraint *literal* to a constraint: a positive
//! literal contributes the atom's relation as recorded in the program's
//! gamma table, a negative literal contributes its complement (`<` ↔ `>=`,
//! `<=` ↔ `>`, `=` ↔ `!=`), so that for any single evaluation exactly one
//! of the two holds.

use std::fmt;

use crate::program::{AtomId, Program, VarDecl, VarId};

/// Relational operator of a constraint expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Rel {
    /// The complement relation, used for negative constraint literals.
    pub fn complement(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Rel::Lt => "#<",
            Rel::Le => "#<=",
            Rel::Gt => "#>",
            Rel::Ge => "#>=",
            Rel::Eq => "#=",
            Rel::Ne => "#!=",
        }
    }

    fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Gt => lhs > rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ne => lhs != rhs,
        }
    }
}

/// A linear constraint in normalized form `Σ cᵢ·xᵢ REL k`: terms sorted by
/// variable, like terms combined, zero coefficients dropped, constant on
/// the right. Construction from raw left/right sides normalizes, so two
/// ways of writing the same linear relation intern to the same expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintExpr {
    pub terms: Vec<(i64, VarId)>,
    pub rel: Rel,
    pub k: i64,
}

impl ConstraintExpr {
    /// Build from raw sides: `lhs REL rhs`, each side a term list plus
    /// constant (`var = None` entries are constants).
    pub fn new(lhs: Vec<(i64, Option<VarId>)>, rel: Rel, rhs: Vec<(i64, Option<VarId>)>) -> Self {
        let mut terms: Vec<(i64, VarId)> = Vec::new();
        let mut k: i64 = 0;
        let mut add = |coeff: i64, var: Option<VarId>, sign: i64, k: &mut i64| match var {
            Some(v) => {
                terms.push((coeff * sign, v));
            }
            None => *k -= coeff * sign,
        };
        for (c, v) in lhs {
            add(c, v, 1, &mut k);
        }
        for (c, v) in rhs {
            add(c, v, -1, &mut k);
        }
        terms.sort_by_key(|&(_, v)| v);
        let mut combined: Vec<(i64, VarId)> = Vec::new();
        for (c, v) in terms {
            match combined.last_mut() {
                Some((lc, lv)) if *lv == v => *lc += c,
                _ => combined.push((c, v)),
            }
        }
        combined.retain(|&(c, _)| c != 0);
        ConstraintExpr { terms: combined, rel, k }
    }

    /// Single-variable convenience: `1*v REL k`.
    pub fn var_rel(v: VarId, rel: Rel, k: i64) -> Self {
        ConstraintExpr { terms: vec![(1, v)], rel, k }
    }

    pub fn complement(&self) -> ConstraintExpr {
        ConstraintExpr { terms: self.terms.clone(), rel: self.rel.complement(), k: self.k }
    }

    /// Exact truth value under a complete evaluation.
    pub fn eval(&self, ev: &Evaluation) -> bool {
        let sum: i128 = self
            .terms
            .iter()
            .map(|&(c, v)| c as i128 * ev.0[v.index()] as i128)
            .sum();
        self.rel.holds(sum, self.k as i128)
    }

    /// Largest absolute value the left side can take over the declared
    /// domains (for overflow validation at load time).
    pub fn magnitude_bound(&self, decls: &[VarDecl]) -> i128 {
        self.terms
            .iter()
            .map(|&(c, v)| {
                let d = &decls[v.index()];
                c.unsigned_abs() as i128 * d.lo.abs().max(d.hi.abs()) as i128
            })
            .sum::<i128>()
            + self.k.unsigned_abs() as i128
    }

    pub fn display<'a>(&'a self, decls: &'a [VarDecl]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, decls }
    }
}

/// Canonical text of an expression, e.g. `x #< 12` or `-2*a + b #>= -3`.
pub struct ExprDisplay<'a> {
    expr: &'a ConstraintExpr,
    decls: &'a [VarDecl],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.expr;
        if e.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, &(c, v)) in e.terms.iter().enumerate() {
            let name = &self.decls[v.index()].name;
            let mag = c.abs();
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
        }
        write!(f, " {} {}", e.rel.token(), e.k)
    }
}

/// A total assignment of declared variables, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation(pub Vec<i64>);

impl Evaluation {
    pub fn value(&self, v: VarId) -> i64 {
        self.0[v.index()]
    }

    /// `name=value` pairs in declaration order.
    pub fn named<'a>(&'a self, decls: &'a [VarDecl]) -> impl Iterator<Item = (&'a str, i64)> {
        decls.iter().zip(&self.0).map(|(d, &v)| (d.name.as_str(), v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryStatus {
    Sat,
    Unsat,
}

/// Outcome of a theory check.
#[derive(Debug, Clone)]
pub struct TheoryVerdict {
    pub status: TheoryStatus,
    /// A satisfying evaluation, present exactly on `Sat`.
    pub witness: Option<Evaluation>,
    /// Indices (into the checked constraint slice) of an unsatisfiable
    /// core, present exactly on `Unsat`. Defaults to the whole set.
    pub core: Option<Vec<usize>>,
}

impl TheoryVerdict {
    pub fn is_sat(&self) -> bool {
        self.status == TheoryStatus::Sat
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TheoryError {
    #[error("minimize_core called on a satisfiable constraint set")]
    CoreOfSat,
}

/// Map a constraint literal to the constraint it imposes: the atom's
/// relation when positive, the complement when negative.
pub fn gamma(p: &Program, lit: (AtomId, bool)) -> ConstraintExpr {
    let expr = p
        .gamma
        .get(&lit.0)
        .unwrap_or_else(|| panic!("atom {} has no gamma entry", p.atom_name(lit.0)));
    if lit.1 {
        expr.clone()
    } else {
        expr.complement()
    }
}

// ---------------------------------------------------------------------
// Decision procedure
// ---------------------------------------------------------------------

/// Normalized internal form: `Σ terms ≤ k`, `Σ terms = k`, or `Σ terms ≠ k`.
#[derive(Debug, Clone)]
struct NCon {
    terms: Vec<(i64, VarId)>,
    op: NOp,
    k: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NOp {
    Le,
    Eq,
    Ne,
}

fn normalize(e: &ConstraintExpr) -> NCon {
    let neg = |ts: &[(i64, VarId)]| ts.iter().map(|&(c, v)| (-c, v)).collect::<Vec<_>>();
    match e.rel {
        Rel::Lt => NCon { terms: e.terms.clone(), op: NOp::Le, k: e.k - 1 },
        Rel::Le => NCon { terms: e.terms.clone(), op: NOp::Le, k: e.k },
        Rel::Gt => NCon { terms: neg(&e.terms), op: NOp::Le, k: -(e.k + 1) },
        Rel::Ge => NCon { terms: neg(&e.terms), op: NOp::Le, k: -e.k },
        Rel::Eq => NCon { terms: e.terms.clone(), op: NOp::Eq, k: e.k },
        Rel::Ne => NCon { terms: e.terms.clone(), op: NOp::Ne, k: e.k },
    }
}

#[derive(Debug, Clone)]
struct Domains {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Domains {
    fn from_decls(decls: &[VarDecl]) -> Self {
        Domains {
            lo: decls.iter().map(|d| d.lo).collect(),
            hi: decls.iter().map(|d| d.hi).collect(),
        }
    }

    fn fixed(&self, v: usize) -> bool {
        self.lo[v] == self.hi[v]
    }

    fn width(&self, v: usize) -> i64 {
        self.hi[v] - self.lo[v]
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

fn clamp_i64(x: i128) -> i64 {
    x.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// One bounds-consistency pass over a `≤` view. Returns `Ok(changed)`.
fn propagate_le(terms: &[(i64, VarId)], k: i64, dom: &mut Domains) -> Result<bool, ()> {
    // Minimal contribution of each term given current bounds.
    let min_of = |c: i64, v: usize, dom: &Domains| -> i128 {
        if c >= 0 {
            c as i128 * dom.lo[v] as i128
        } else {
            c as i128 * dom.hi[v] as i128
        }
    };
    let total_min: i128 = terms.iter().map(|&(c, v)| min_of(c, v.index(), dom)).sum();
    if total_min > k as i128 {
        return Err(());
    }
    let mut changed = false;
    for &(c, v) in terms {
        let v = v.index();
        let others = total_min - min_of(c, v, dom);
        let slack = k as i128 - others; // c*x ≤ slack
        if c > 0 {
            let ub = clamp_i64(floor_div(slack, c as i128));
            if ub < dom.hi[v] {
                dom.hi[v] = ub;
                changed = true;
                if dom.lo[v] > dom.hi[v] {
                    return Err(());
                }
            }
        } else {
            let lb = clamp_i64(ceil_div(slack, c as i128));
            if lb > dom.lo[v] {
                dom.lo[v] = lb;
                changed = true;
                if dom.lo[v] > dom.hi[v] {
                    return Err(());
                }
            }
        }
    }
    Ok(changed)
}

/// Bounds pruning for one constraint; `Err` on wipeout.
fn propagate_one(con: &NCon, dom: &mut Domains) -> Result<bool, ()> {
    match con.op {
        NOp::Le => propagate_le(&con.terms, con.k, dom),
        NOp::Eq => {
            let a = propagate_le(&con.terms, con.k, dom)?;
            let negged: Vec<(i64, VarId)> = con.terms.iter().map(|&(c, v)| (-c, v)).collect();
            let b = propagate_le(&negged, -con.k, dom)?;
            Ok(a || b)
        }
        NOp::Ne => {
            // Disequality prunes only when at most one variable is unfixed,
            // and then only domain endpoints (bounds consistency).
            let mut unfixed: Option<(i64, usize)> = None;
            let mut fixed_sum: i128 = 0;
            for &(c, v) in &con.terms {
                let vi = v.index();
                if dom.fixed(vi) {
                    fixed_sum += c as i128 * dom.lo[vi] as i128;
                } else if unfixed.is_some() {
                    return Ok(false);
                } else {
                    unfixed = Some((c, vi));
                }
            }
            match unfixed {
                None => {
                    if fixed_sum == con.k as i128 {
                        Err(())
                    } else {
                        Ok(false)
                    }
                }
                Some((c, v)) => {
                    let rem = con.k as i128 - fixed_sum; // c*x must avoid rem
                    if rem % c as i128 != 0 {
                        return Ok(false);
                    }
                    let bad = rem / c as i128;
                    if bad < dom.lo[v] as i128 || bad > dom.hi[v] as i128 {
                        return Ok(false);
                    }
                    let bad = bad as i64;
                    if dom.lo[v] == bad && dom.hi[v] == bad {
                        return Err(());
                    }
                    if dom.lo[v] == bad {
                        dom.lo[v] += 1;
                        Ok(true)
                    } else if dom.hi[v] == bad {
                        dom.hi[v] -= 1;
                        Ok(true)
                    } else {
                        Ok(false)
                    }
                }
            }
        }
    }
}

fn propagate_fixpoint(cons: &[NCon], dom: &mut Domains) -> Result<(), ()> {
    loop {
        let mut changed = false;
        for c in cons {
            changed |= propagate_one(c, dom)?;
        }
        if !changed {
            return Ok(());
        }
    }
}

fn search(cons: &[NCon], dom: &mut Domains) -> Option<Vec<i64>> {
    if propagate_fixpoint(cons, dom).is_err() {
        return None;
    }
    // Smallest-domain-first among unfixed variables; ties break on index.
    let mut pick: Option<usize> = None;
    for v in 0..dom.lo.len() {
        if !dom.fixed(v) {
            match pick {
                Some(p) if dom.width(p) <= dom.width(v) => {}
                _ => pick = Some(v),
            }
        }
    }
    let Some(v) = pick else {
        return Some(dom.lo.clone());
    };
    let (lo, hi) = (dom.lo[v], dom.hi[v]);
    for val in lo..=hi {
        let mut child = dom.clone();
        child.lo[v] = val;
        child.hi[v] = val;
        if let Some(sol) = search(cons, &mut child) {
            return Some(sol);
        }
    }
    None
}

/// Decide a conjunction of constraints over the declared domains.
///
/// `Sat` verdicts carry a witness that is re-checked exactly against every
/// input constraint before returning; `Unsat` verdicts carry the whole
/// input as their (default) core.
pub fn solve_constraints(cs: &[ConstraintExpr], decls: &[VarDecl]) -> TheoryVerdict {
    for d in decls {
        assert!(d.lo <= d.hi, "variable `{}` declared with empty domain", d.name);
    }
    let cons: Vec<NCon> = cs.iter().map(normalize).collect();
    let mut dom = Domains::from_decls(decls);
    match search(&cons, &mut dom) {
        Some(values) => {
            let ev = Evaluation(values);
            for c in cs {
                assert!(
                    c.eval(&ev),
                    "theory witness fails `{}`",
                    c.display(decls)
                );
            }
            TheoryVerdict { status: TheoryStatus::Sat, witness: Some(ev), core: None }
        }
        None => TheoryVerdict {
            status: TheoryStatus::Unsat,
            witness: None,
            core: Some((0..cs.len()).collect()),
        },
    }
}

/// Theory-check a set of constraint literals of `p` through [`gamma`].
/// The verdict's core indices refer to positions in `lits`.
pub fn check_literals(p: &Program, lits: &[(AtomId, bool)]) -> TheoryVerdict {
    let cs: Vec<ConstraintExpr> = lits.iter().map(|&l| gamma(p, l)).collect();
    solve_constraints(&cs, &p.decls)
}

/// Shrink an unsatisfiable constraint-literal set to a 1-minimal core by
/// deletion: drop each literal in turn and keep the removal whenever the
/// rest stays unsatisfiable. Errors if the input set is satisfiable.
pub fn minimize_core(
    p: &Program,
    lits: &[(AtomId, bool)],
) -> Result<Vec<(AtomId, bool)>, TheoryError> {
    if check_literals(p, lits).is_sat() {
        return Err(TheoryError::CoreOfSat);
    }
    let mut kept: Vec<(AtomId, bool)> = lits.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        if !check_literals(p, &trial).is_sat() {
            kept = trial;
        } else {
            i += 1;
        }
    }
    debug_assert!(!check_literals(p, &kept).is_sat());
    Ok(kept)
}
