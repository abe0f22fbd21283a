//! Weighted sequence: arrange `n` leaves, each carrying a weight and a
//! cardinality, into a sequence and give every position but the first one
//! of three colors. The color decides what a position costs:
//!
//! * `red`   — weight of the leaf plus weight of its predecessor,
//! * `green` — cardinality of the leaf plus cardinality of its predecessor,
//! * `blue`  — weight plus cardinality of the leaf itself.
//!
//! The first position costs nothing. A solution is an order plus coloring
//! whose total cost stays within `max_cost`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    at_most_one, exactly_one, force_if, force_true, linear, var_eq, DomainError, Encoding,
    SolutionFile,
};
use crate::program::{AtomId, Head, Program, Rule};
use crate::theory::Rel;

pub const COLORS: [&str; 3] = ["red", "green", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaf {
    pub weight: i64,
    pub cardinality: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WseqInstance {
    pub seed: u64,
    pub leaves: Vec<Leaf>,
    pub max_cost: i64,
}

impl WseqInstance {
    pub fn validate(&self) -> Result<(), DomainError> {
        let n = self.leaves.len();
        if !(2..=12).contains(&n) {
            return Err(DomainError::BadInstance(format!(
                "wseq needs between 2 and 12 leaves, got {n}"
            )));
        }
        for (i, l) in self.leaves.iter().enumerate() {
            if l.weight < 1 || l.cardinality < 1 || l.weight > 1_000_000 || l.cardinality > 1_000_000
            {
                return Err(DomainError::BadInstance(format!(
                    "leaf {i} attributes must lie in [1, 1000000]"
                )));
            }
        }
        if self.max_cost < 0 {
            return Err(DomainError::BadInstance("max_cost must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Cost of placing `cur` directly after `prev` under `color` (an index
/// into [`COLORS`]).
fn pair_cost(prev: &Leaf, cur: &Leaf, color: usize) -> i64 {
    match color {
        0 => cur.weight + prev.weight,
        1 => cur.cardinality + prev.cardinality,
        _ => cur.weight + cur.cardinality,
    }
}

/// Exact minimum total cost over all orders and colorings, by dynamic
/// programming over (visited subset, last leaf). Since colors act
/// per-position, the best color for a fixed adjacent pair is just the
/// cheapest of the three.
pub fn optimum(leaves: &[Leaf]) -> i64 {
    let n = leaves.len();
    assert!((1..=16).contains(&n), "optimum oracle supports 1..=16 leaves");
    const INF: i64 = i64::MAX / 4;
    let full = 1usize << n;
    let mut dp = vec![INF; full * n];
    for l in 0..n {
        dp[(1 << l) * n + l] = 0;
    }
    for mask in 1..full {
        for last in 0..n {
            let cur = dp[mask * n + last];
            if cur >= INF || mask & (1 << last) == 0 {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let step =
                    (0..3).map(|c| pair_cost(&leaves[last], &leaves[next], c)).min().unwrap();
                let slot = (mask | 1 << next) * n + next;
                dp[slot] = dp[slot].min(cur + step);
            }
        }
    }
    (0..n).map(|l| dp[(full - 1) * n + l]).min().unwrap()
}

/// Generate an instance: leaf attributes uniform in `[1, 5n]`, and
/// `max_cost` set to the exact optimum plus a seed-dependent slack of
/// 0–20% — satisfiable by construction, occasionally tight.
pub fn gen(n: usize, seed: u64) -> Result<WseqInstance, DomainError> {
    if !(2..=12).contains(&n) {
        return Err(DomainError::BadParameter(format!(
            "wseq size must be between 2 and 12 leaves, got {n}"
        )));
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_add((n as u64).wrapping_mul(0x9E3779B97F4A7C15)));
    let hi = (5 * n) as i64;
    let leaves: Vec<Leaf> = (0..n)
        .map(|_| Leaf { weight: rng.gen_range(1..=hi), cardinality: rng.gen_range(1..=hi) })
        .collect();
    let opt = optimum(&leaves);
    let slack_pct: i64 = if rng.gen_range(0..4u32) == 0 { 0 } else { rng.gen_range(5..=20) };
    let max_cost = opt + (opt * slack_pct + 99) / 100;
    let inst = WseqInstance { seed, leaves, max_cost };
    inst.validate()?;
    Ok(inst)
}

/// Encode the instance. All three encodings share the decision structure
/// (leaf-to-position assignment plus per-position colors, guarded by
/// exactly-one scaffolding) and differ in where the cost arithmetic
/// lives:
///
/// * `pure-asp`  — costs become derived atoms and the bound is a grounded
///   running-sum chain; no constraint atoms at all.
/// * `true-casp` — decisions stay regular, per-position costs become
///   constraint variables pinned by conditional equations, and the bound
///   is one linear constraint atom.
/// * `pure-csp`  — additionally the decisions themselves move into
///   constraint variables, reified back through `#=` atoms.
pub fn encode(inst: &WseqInstance, enc: Encoding) -> Program {
    let n = inst.leaves.len();
    let m = inst.max_cost;
    let mut p = Program::new();

    // Decision grids. leafpos[l][pos] ⇔ leaf l sits at position pos;
    // poscolor[pos-1][c] ⇔ position pos (≥ 1) has color c.
    let mut leafpos: Vec<Vec<AtomId>> = Vec::with_capacity(n);
    let mut poscolor: Vec<Vec<AtomId>> = Vec::with_capacity(n - 1);
    match enc {
        Encoding::PureAsp | Encoding::TrueCasp => {
            for l in 0..n {
                leafpos.push(
                    (0..n).map(|pos| p.intern_atom(&format!("leafpos_{l}_{pos}"))).collect(),
                );
            }
            for pos in 1..n {
                poscolor.push(
                    COLORS.iter().map(|c| p.intern_atom(&format!("poscolor_{pos}_{c}"))).collect(),
                );
            }
            for row in leafpos.iter().chain(&poscolor) {
                for &a in row {
                    p.rules.push(Rule::choice(a));
                }
            }
        }
        Encoding::PureCsp => {
            for l in 0..n {
                let v = p.declare_var(&format!("leafpos_{l}"), 0, (n - 1) as i64).unwrap();
                leafpos.push((0..n).map(|pos| var_eq(&mut p, v, pos as i64)).collect());
            }
            for pos in 1..n {
                let v = p.declare_var(&format!("poscolor_{pos}"), 0, 2).unwrap();
                poscolor.push((0..3).map(|c| var_eq(&mut p, v, c as i64)).collect());
            }
        }
    }
    for row in &leafpos {
        exactly_one(&mut p, row);
    }
    for pos in 0..n {
        let column: Vec<AtomId> = leafpos.iter().map(|row| row[pos]).collect();
        at_most_one(&mut p, &column);
    }
    for row in &poscolor {
        exactly_one(&mut p, row);
    }

    match enc {
        Encoding::PureAsp => encode_cost_grounded(inst, &mut p, &leafpos, &poscolor),
        Encoding::TrueCasp | Encoding::PureCsp => {
            // Per-position cost variables, pinned by the active triple
            // (predecessor, leaf, color).
            let mut values: BTreeSet<i64> = BTreeSet::new();
            for prev in 0..n {
                for cur in 0..n {
                    if cur == prev {
                        continue;
                    }
                    for c in 0..3 {
                        values.insert(pair_cost(&inst.leaves[prev], &inst.leaves[cur], c));
                    }
                }
            }
            let (lo, hi) = (*values.first().unwrap(), *values.last().unwrap());
            let cost_vars: Vec<_> = (1..n)
                .map(|pos| p.declare_var(&format!("cost_{pos}"), lo, hi).unwrap())
                .collect();
            // Reify each cost variable over its achievable values under
            // exactly-one scaffolding, so the cost pattern of a model is
            // fully determined by the decisions above — every constraint
            // atom stays pinned.
            let grids: Vec<BTreeMap<i64, AtomId>> = (1..n)
                .map(|pos| {
                    let row: BTreeMap<i64, AtomId> = values
                        .iter()
                        .map(|&v| (v, var_eq(&mut p, cost_vars[pos - 1], v)))
                        .collect();
                    let atoms: Vec<AtomId> = row.values().copied().collect();
                    exactly_one(&mut p, &atoms);
                    row
                })
                .collect();
            for pos in 1..n {
                for prev in 0..n {
                    for cur in 0..n {
                        if cur == prev {
                            continue;
                        }
                        for c in 0..3 {
                            let v = pair_cost(&inst.leaves[prev], &inst.leaves[cur], c);
                            force_if(
                                &mut p,
                                vec![leafpos[prev][pos - 1], leafpos[cur][pos], poscolor[pos - 1][c]],
                                grids[pos - 1][&v],
                            );
                        }
                    }
                }
            }
            let total =
                linear(&mut p, cost_vars.iter().map(|&v| (1, v)).collect(), Rel::Le, m);
            force_true(&mut p, total);
        }
    }
    debug_assert_eq!(p.validate(), Ok(()));
    p
}

/// Grounded cost bound: derived `poscost` atoms plus a running-sum chain
/// `costup_pos_s` capped at `max_cost`. Costs are strictly positive, so
/// capping every prefix never excludes a valid sequence.
fn encode_cost_grounded(
    inst: &WseqInstance,
    p: &mut Program,
    leafpos: &[Vec<AtomId>],
    poscolor: &[Vec<AtomId>],
) {
    let n = inst.leaves.len();
    let m = inst.max_cost;
    let mut poscost: Vec<BTreeMap<i64, AtomId>> = vec![BTreeMap::new(); n];
    for pos in 1..n {
        for prev in 0..n {
            for cur in 0..n {
                if cur == prev {
                    continue;
                }
                for c in 0..3 {
                    let v = pair_cost(&inst.leaves[prev], &inst.leaves[cur], c);
                    let atom = *poscost[pos]
                        .entry(v)
                        .or_insert_with(|| p.intern_atom(&format!("poscost_{pos}_{v}")));
                    p.rules.push(Rule {
                        head: Head::Atom(atom),
                        pos: vec![leafpos[prev][pos - 1], leafpos[cur][pos], poscolor[pos - 1][c]],
                        neg: vec![],
                        negneg: vec![],
                    });
                }
            }
        }
    }
    // costup_pos_s ⇔ positions 1..=pos cost exactly s; anything beyond
    // max_cost is cut immediately.
    let mut sums: BTreeMap<i64, AtomId> = BTreeMap::new();
    for pos in 1..n {
        let mut next: BTreeMap<i64, AtomId> = BTreeMap::new();
        if pos == 1 {
            for (&v, &pc) in &poscost[1] {
                if v <= m {
                    let up = *next
                        .entry(v)
                        .or_insert_with(|| p.intern_atom(&format!("costup_1_{v}")));
                    p.rules.push(Rule {
                        head: Head::Atom(up),
                        pos: vec![pc],
                        neg: vec![],
                        negneg: vec![],
                    });
                } else {
                    p.rules.push(Rule::falsum(vec![pc], vec![]));
                }
            }
        } else {
            for (&s, &up_prev) in &sums {
                for (&v, &pc) in &poscost[pos] {
                    let t = s + v;
                    if t <= m {
                        let up = *next
                            .entry(t)
                            .or_insert_with(|| p.intern_atom(&format!("costup_{pos}_{t}")));
                        p.rules.push(Rule {
                            head: Head::Atom(up),
                            pos: vec![up_prev, pc],
                            neg: vec![],
                            negneg: vec![],
                        });
                    } else {
                        p.rules.push(Rule::falsum(vec![up_prev, pc], vec![]));
                    }
                }
            }
        }
        sums = next;
    }
}

/// A decoded solution: `order[pos]` is the leaf at `pos`, `colors[pos-1]`
/// the color index of position `pos ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WseqSolution {
    pub order: Vec<usize>,
    pub colors: Vec<usize>,
}

/// Read the domain decision back out of a solution file, whichever
/// encoding produced it: `pure-csp` leaves it in the variable
/// assignments, the others in `leafpos_*` / `poscolor_*` atoms.
pub fn decode(inst: &WseqInstance, sol: &SolutionFile) -> Result<WseqSolution, String> {
    let n = inst.leaves.len();
    let mut order: Vec<Option<usize>> = vec![None; n];
    let mut colors: Vec<Option<usize>> = vec![None; n - 1];
    let place = |leaf: usize, pos: usize, order: &mut Vec<Option<usize>>| {
        if leaf >= n || pos >= n {
            return Err(format!("leaf/position out of range: leaf {leaf} at {pos}"));
        }
        match order[pos].replace(leaf) {
            Some(other) if other != leaf => Err(format!("two leaves at position {pos}")),
            _ => Ok(()),
        }
    };
    let paint = |pos: usize, c: usize, colors: &mut Vec<Option<usize>>| {
        if !(1..n).contains(&pos) || c >= 3 {
            return Err(format!("bad color entry at position {pos}"));
        }
        match colors[pos - 1].replace(c) {
            Some(other) if other != c => Err(format!("two colors at position {pos}")),
            _ => Ok(()),
        }
    };
    if sol.assignments.contains_key("leafpos_0") {
        for l in 0..n {
            let v = *sol
                .assignments
                .get(&format!("leafpos_{l}"))
                .ok_or_else(|| format!("missing assignment leafpos_{l}"))?;
            if !(0..n as i64).contains(&v) {
                return Err(format!("leafpos_{l} out of range: {v}"));
            }
            place(l, v as usize, &mut order)?;
        }
        for pos in 1..n {
            let v = *sol
                .assignments
                .get(&format!("poscolor_{pos}"))
                .ok_or_else(|| format!("missing assignment poscolor_{pos}"))?;
            if !(0..3).contains(&v) {
                return Err(format!("poscolor_{pos} out of range: {v}"));
            }
            paint(pos, v as usize, &mut colors)?;
        }
    } else {
        for name in &sol.true_atoms {
            let parts: Vec<&str> = name.split('_').collect();
            match parts.as_slice() {
                ["leafpos", l, pos] => {
                    let l: usize = l.parse().map_err(|_| format!("bad atom {name}"))?;
                    let pos: usize = pos.parse().map_err(|_| format!("bad atom {name}"))?;
                    place(l, pos, &mut order)?;
                }
                ["poscolor", pos, c] => {
                    let pos: usize = pos.parse().map_err(|_| format!("bad atom {name}"))?;
                    let c = COLORS
                        .iter()
                        .position(|t| t == c)
                        .ok_or_else(|| format!("bad color in {name}"))?;
                    paint(pos, c, &mut colors)?;
                }
                _ => {}
            }
        }
    }
    let order: Vec<usize> = order
        .into_iter()
        .enumerate()
        .map(|(pos, l)| l.ok_or(format!("no leaf at position {pos}")))
        .collect::<Result<_, _>>()?;
    let colors: Vec<usize> = colors
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or(format!("no color at position {}", i + 1)))
        .collect::<Result<_, _>>()?;
    Ok(WseqSolution { order, colors })
}

/// Check a decoded solution against the instance alone. The cost formula
/// is recomputed here from scratch, on purpose: this function must stay
/// independent of the encoders.
pub fn verify(inst: &WseqInstance, sol: &WseqSolution) -> Result<(), String> {
    let n = inst.leaves.len();
    if sol.order.len() != n {
        return Err(format!("order has {} entries, expected {n}", sol.order.len()));
    }
    if sol.colors.len() != n - 1 {
        return Err(format!("colors has {} entries, expected {}", sol.colors.len(), n - 1));
    }
    let mut seen = vec![false; n];
    for &l in &sol.order {
        if l >= n || std::mem::replace(&mut seen[l], true) {
            return Err(format!("order is not a permutation: leaf {l} repeated or out of range"));
        }
    }
    let mut total: i64 = 0;
    for pos in 1..n {
        let cur = &inst.leaves[sol.order[pos]];
        let prev = &inst.leaves[sol.order[pos - 1]];
        total += match sol.colors[pos - 1] {
            0 => cur.weight + prev.weight,
            1 => cur.cardinality + prev.cardinality,
            2 => cur.weight + cur.cardinality,
            c => return Err(format!("color index {c} out of range at position {pos}")),
        };
    }
    if total > inst.max_cost {
        return Err(format!("total cost {total} exceeds bound {}", inst.max_cost));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{solution_file, Instance};
    use crate::integration::{enumerate_all, BlockingMode, Schema, SolveConfig};

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn rec(acc: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, used: &mut Vec<bool>) {
            let n = used.len();
            if cur.len() == n {
                acc.push(cur.clone());
                return;
            }
            for l in 0..n {
                if !used[l] {
                    used[l] = true;
                    cur.push(l);
                    rec(acc, cur, used);
                    cur.pop();
                    used[l] = false;
                }
            }
        }
        let mut acc = vec![];
        rec(&mut acc, &mut vec![], &mut vec![false; n]);
        acc
    }

    /// Every (order, coloring) pair within the bound, by brute force.
    fn exhaustive_solutions(inst: &WseqInstance) -> BTreeSet<String> {
        let n = inst.leaves.len();
        let mut out = BTreeSet::new();
        for order in permutations(n) {
            for code in 0..3usize.pow((n - 1) as u32) {
                let mut colors = vec![0usize; n - 1];
                let mut rest = code;
                for slot in colors.iter_mut() {
                    *slot = rest % 3;
                    rest /= 3;
                }
                let sol = WseqSolution { order: order.clone(), colors };
                if verify(inst, &sol).is_ok() {
                    out.insert(format!("{sol:?}"));
                }
            }
        }
        out
    }

    #[test]
    fn optimum_matches_exhaustive_search_at_small_sizes() {
        for n in 2..=5usize {
            for seed in 0..4u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(900 + seed * 31 + n as u64);
                let leaves: Vec<Leaf> = (0..n)
                    .map(|_| Leaf {
                        weight: rng.gen_range(1..=5 * n as i64),
                        cardinality: rng.gen_range(1..=5 * n as i64),
                    })
                    .collect();
                let mut best = i64::MAX;
                for order in permutations(n) {
                    for code in 0..3usize.pow((n - 1) as u32) {
                        let mut total = 0;
                        let mut rest = code;
                        for pos in 1..n {
                            let c = rest % 3;
                            rest /= 3;
                            total += pair_cost(&leaves[order[pos - 1]], &leaves[order[pos]], c);
                        }
                        best = best.min(total);
                    }
                }
                assert_eq!(optimum(&leaves), best, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn generated_instances_are_deterministic_and_satisfiable() {
        for n in [2, 4, 7, 12] {
            for seed in 0..3 {
                let a = gen(n, seed).unwrap();
                let b = gen(n, seed).unwrap();
                assert_eq!(a, b);
                assert!(optimum(&a.leaves) <= a.max_cost);
            }
        }
        assert!(gen(1, 0).is_err());
        assert!(gen(13, 0).is_err());
    }

    #[test]
    fn pure_asp_is_propositional_and_the_others_are_not() {
        let inst = gen(4, 1).unwrap();
        let asp = encode(&inst, Encoding::PureAsp);
        assert!(asp.constraint_atoms().next().is_none());
        assert!(asp.decls.is_empty());
        for enc in [Encoding::TrueCasp, Encoding::PureCsp] {
            let p = encode(&inst, enc);
            assert!(p.constraint_atoms().next().is_some(), "{enc} must use constraint atoms");
            assert!(!p.decls.is_empty());
        }
        // pure-csp keeps no regular decision atoms at all.
        let csp = encode(&inst, Encoding::PureCsp);
        assert_eq!(csp.constraint_atoms().count(), csp.n_atoms());
    }

    #[test]
    fn encodings_print_and_reparse_losslessly() {
        let inst = gen(3, 2).unwrap();
        for enc in [Encoding::PureAsp, Encoding::TrueCasp, Encoding::PureCsp] {
            let p = encode(&inst, enc);
            let text = p.to_text();
            let back = crate::program::parse_program(&text)
                .unwrap_or_else(|e| panic!("{enc}: reparse failed: {e}"));
            assert_eq!(back.to_text(), text, "{enc}");
        }
    }

    #[test]
    fn model_counts_match_exhaustive_enumeration_across_encodings() {
        for seed in [1, 5, 9] {
            let inst = gen(3, seed).unwrap();
            let want = exhaustive_solutions(&inst);
            assert!(!want.is_empty(), "slack makes at least the optimum feasible");
            for enc in [Encoding::PureAsp, Encoding::TrueCasp, Encoding::PureCsp] {
                let p = encode(&inst, enc);
                let cfg = SolveConfig {
                    schema: Schema::Grey,
                    blocking: BlockingMode::Model,
                    minimize_core: false,
                    budget: None,
                };
                let e = enumerate_all(&p, &cfg);
                assert!(e.complete);
                let mut got = BTreeSet::new();
                for s in &e.solutions {
                    let file = solution_file(&p, s);
                    let dec = decode(&inst, &file).unwrap();
                    verify(&inst, &dec).unwrap();
                    got.insert(format!("{dec:?}"));
                }
                assert_eq!(got.len(), e.solutions.len(), "{enc}: projection must be 1-1");
                assert_eq!(got, want, "seed {seed}, {enc}");
            }
        }
    }

    #[test]
    fn every_schema_solves_and_verifies_a_midsize_instance() {
        let inst = gen(4, 3).unwrap();
        let wrapped = Instance::Wseq(inst.clone());
        for enc in [Encoding::PureAsp, Encoding::TrueCasp, Encoding::PureCsp] {
            let p = encode(&inst, enc);
            for schema in Schema::ALL {
                let cfg = SolveConfig::with_schema(schema);
                let (out, _stats) = crate::integration::solve_with_schema(&p, &cfg);
                let sol = match out {
                    crate::integration::CaspOutcome::Sat(s) => s,
                    other => panic!("{enc}/{schema}: expected sat, got {other:?}"),
                };
                let file = solution_file(&p, &sol);
                wrapped.verify(&file).unwrap_or_else(|e| panic!("{enc}/{schema}: {e}"));
            }
        }
    }
}
