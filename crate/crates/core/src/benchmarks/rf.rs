//! Reverse folding: a chain of `n` unit segments lies on the integer
//! plane, initially straight from `(0,0)` to `(n,0)`. A pivot move
//! `(step, segment i, direction)` rotates segment `i` and everything
//! after it by 90° around the segment's start vertex `i−1`:
//!
//! * clockwise:        `(x, y) ↦ (cx + (y − cy), cy − (x − cx))`
//! * counterclockwise: `(x, y) ↦ (cx − (y − cy), cy + (x − cx))`
//!
//! Moves happen one per step. After every move all `n+1` vertices must be
//! pairwise distinct, and after exactly `t` moves the chain must match
//! the goal configuration. Vertex 0 never moves, so every reachable
//! vertex stays within `[−n, n]` on both axes (the chain is always a
//! connected path of unit steps from the origin).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{exactly_one, force_if, force_true, linear, var_eq, Dir, DomainError, Encoding, SolutionFile};
use crate::program::{AtomId, Head, Program, Rule, VarId};
use crate::theory::Rel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfInstance {
    pub seed: u64,
    pub n_segments: usize,
    pub t_moves: usize,
    /// Goal vertex positions, `n_segments + 1` of them starting at the
    /// anchored origin.
    pub goal: Vec<(i64, i64)>,
}

impl RfInstance {
    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |msg: String| Err(DomainError::BadInstance(msg));
        let n = self.n_segments;
        if !(1..=8).contains(&n) {
            return bad(format!("rf needs between 1 and 8 segments, got {n}"));
        }
        if self.t_moves > 5 {
            return bad(format!("rf supports at most 5 moves, got {}", self.t_moves));
        }
        if self.goal.len() != n + 1 {
            return bad(format!("goal must list {} vertices", n + 1));
        }
        if self.goal[0] != (0, 0) {
            return bad("the chain is anchored: goal must start at (0, 0)".into());
        }
        let b = n as i64;
        for (v, &(x, y)) in self.goal.iter().enumerate() {
            if x.abs() > b || y.abs() > b {
                return bad(format!("goal vertex {v} at ({x}, {y}) is unreachable"));
            }
        }
        for w in self.goal.windows(2) {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            if dx.abs() + dy.abs() != 1 {
                return bad("goal segments must be unit steps along the axes".into());
            }
        }
        for u in 0..=n {
            for v in u + 1..=n {
                if self.goal[u] == self.goal[v] {
                    return bad(format!("goal vertices {u} and {v} coincide"));
                }
            }
        }
        Ok(())
    }
}

fn rotate(center: (i64, i64), pt: (i64, i64), dir: Dir) -> (i64, i64) {
    let (cx, cy) = center;
    let (x, y) = pt;
    match dir {
        Dir::Cw => (cx + (y - cy), cy - (x - cx)),
        Dir::Ccw => (cx - (y - cy), cy + (x - cx)),
    }
}

fn apply_move(pts: &mut [(i64, i64)], segment: usize, dir: Dir) {
    let center = pts[segment - 1];
    for pt in &mut pts[segment..] {
        *pt = rotate(center, *pt, dir);
    }
}

fn all_distinct(pts: &[(i64, i64)]) -> bool {
    for u in 0..pts.len() {
        for v in u + 1..pts.len() {
            if pts[u] == pts[v] {
                return false;
            }
        }
    }
    true
}

fn initial_chain(n: usize) -> Vec<(i64, i64)> {
    (0..=n).map(|v| (v as i64, 0)).collect()
}

/// Generate an instance by walking `t` random self-avoiding pivot moves
/// from the straight chain — satisfiable by construction.
pub fn gen(n: usize, t: usize, seed: u64) -> Result<RfInstance, DomainError> {
    if !(1..=8).contains(&n) {
        return Err(DomainError::BadParameter(format!(
            "rf size must be between 1 and 8 segments, got {n}"
        )));
    }
    if t > 5 {
        return Err(DomainError::BadParameter(format!("rf allows at most 5 moves, got {t}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_add((n as u64).wrapping_mul(0xA24BAED4963EE407))
            .wrapping_add((t as u64).wrapping_mul(0x9FB21C651E98DF25)),
    );
    let mut pts = initial_chain(n);
    for _ in 0..t {
        // Undoing the previous move is always available, so this loop
        // terminates.
        loop {
            let segment = rng.gen_range(1..=n);
            let dir = if rng.gen_bool(0.5) { Dir::Cw } else { Dir::Ccw };
            let mut next = pts.clone();
            apply_move(&mut next, segment, dir);
            if all_distinct(&next) {
                pts = next;
                break;
            }
        }
    }
    let inst = RfInstance { seed, n_segments: n, t_moves: t, goal: pts };
    inst.validate()?;
    Ok(inst)
}

/// Sign-safe token for grounded atom names (`-3` → `m3`).
fn tok(v: i64) -> String {
    if v < 0 {
        format!("m{}", -v)
    } else {
        v.to_string()
    }
}

/// Encode the instance. Move selection is regular in both encodings —
/// one `pivot_s_i_d` choice per step under exactly-one scaffolding. They
/// differ in how positions are tracked:
///
/// * `true-casp` — coordinates are constraint variables; each pivot atom
///   is mirrored into a 0/1 indicator variable (pinned in both
///   directions), and the motion equations become always-forced
///   inequalities whose slack vanishes when the indicator is 1. Vertex
///   distinctness works on packed `code = (2n+1)·x + y` variables.
/// * `pure-asp` — positions are grounded functional atoms
///   `tfoldx/tfoldy` derived step by step from the pivots, with
///   grounded collision rules.
///
/// There is no `pure-csp` variant: move selection cannot move into the
/// theory.
pub fn encode(inst: &RfInstance, enc: Encoding) -> Program {
    match enc {
        Encoding::PureAsp => encode_grounded(inst),
        Encoding::TrueCasp => encode_hybrid(inst),
        Encoding::PureCsp => unreachable!("rejected by Instance::encode"),
    }
}

/// Intern the per-step pivot choice atoms with their scaffolding:
/// `pivots[s-1]` holds `(segment, dir, atom)` for step `s`.
fn pivot_grid(inst: &RfInstance, p: &mut Program) -> Vec<Vec<(usize, Dir, AtomId)>> {
    let mut grid = vec![];
    for s in 1..=inst.t_moves {
        let mut row = vec![];
        for i in 1..=inst.n_segments {
            for dir in [Dir::Cw, Dir::Ccw] {
                let a = p.intern_atom(&format!("pivot_{s}_{i}_{}", dir.token()));
                p.rules.push(Rule::choice(a));
                row.push((i, dir, a));
            }
        }
        let atoms: Vec<AtomId> = row.iter().map(|&(_, _, a)| a).collect();
        exactly_one(p, &atoms);
        grid.push(row);
    }
    grid
}

fn encode_hybrid(inst: &RfInstance) -> Program {
    let n = inst.n_segments;
    let t = inst.t_moves;
    let b = n as i64;
    let big_m = 4 * b;
    let mut p = Program::new();
    let pivots = pivot_grid(inst, &mut p);

    // Coordinate variables per step and vertex.
    let x: Vec<Vec<VarId>> = (0..=t)
        .map(|s| {
            (0..=n).map(|v| p.declare_var(&format!("x_{s}_{v}"), -b, b).unwrap()).collect()
        })
        .collect();
    let y: Vec<Vec<VarId>> = (0..=t)
        .map(|s| {
            (0..=n).map(|v| p.declare_var(&format!("y_{s}_{v}"), -b, b).unwrap()).collect()
        })
        .collect();

    // Initial and goal configurations are pinned outright.
    for v in 0..=n {
        let a = var_eq(&mut p, x[0][v], v as i64);
        force_true(&mut p, a);
        let a = var_eq(&mut p, y[0][v], 0);
        force_true(&mut p, a);
        let a = var_eq(&mut p, x[t][v], inst.goal[v].0);
        force_true(&mut p, a);
        let a = var_eq(&mut p, y[t][v], inst.goal[v].1);
        force_true(&mut p, a);
    }

    // One 0/1 indicator per pivot atom, glued to it in both directions so
    // the theory always sees exactly the chosen move.
    for s in 1..=t {
        for &(i, dir, atom) in &pivots[s - 1] {
            let piv = p
                .declare_var(&format!("piv_{s}_{i}_{}", dir.token()), 0, 1)
                .unwrap();
            let eq1 = var_eq(&mut p, piv, 1);
            let eq0 = var_eq(&mut p, piv, 0);
            // Exactly one of the two indicator values holds, and which one
            // is tied to the pivot atom — the indicator atoms are fully
            // pinned, never free for the base solver to guess at.
            exactly_one(&mut p, &[eq0, eq1]);
            force_if(&mut p, vec![atom], eq1);
            p.rules.push(Rule::falsum(vec![], vec![atom, eq0]));

            // Motion rows for this candidate move, all forced: the big-M
            // slack disappears exactly when the indicator is 1. The
            // rotation center is vertex i−1.
            let pin = |p: &mut Program, terms: Vec<(i64, VarId)>| {
                let mut fwd = terms.clone();
                fwd.push((big_m, piv));
                let a = linear(p, fwd, Rel::Le, big_m);
                force_true(p, a);
                let mut bwd: Vec<(i64, VarId)> = terms.iter().map(|&(c, v)| (-c, v)).collect();
                bwd.push((big_m, piv));
                let a = linear(p, bwd, Rel::Le, big_m);
                force_true(p, a);
            };
            for v in 0..=n {
                if v < i {
                    // Stays put: x_s_v = x_{s−1}_v, same for y.
                    pin(&mut p, vec![(1, x[s][v]), (-1, x[s - 1][v])]);
                    pin(&mut p, vec![(1, y[s][v]), (-1, y[s - 1][v])]);
                } else {
                    let (cx, cy) = (x[s - 1][i - 1], y[s - 1][i - 1]);
                    match dir {
                        Dir::Cw => {
                            // x' = cx + (y − cy); y' = cy − (x − cx)
                            pin(&mut p, vec![(1, x[s][v]), (-1, cx), (-1, y[s - 1][v]), (1, cy)]);
                            pin(&mut p, vec![(1, y[s][v]), (-1, cy), (1, x[s - 1][v]), (-1, cx)]);
                        }
                        Dir::Ccw => {
                            // x' = cx − (y − cy); y' = cy + (x − cx)
                            pin(&mut p, vec![(1, x[s][v]), (-1, cx), (1, y[s - 1][v]), (-1, cy)]);
                            pin(&mut p, vec![(1, y[s][v]), (-1, cy), (-1, x[s - 1][v]), (1, cx)]);
                        }
                    }
                }
            }
        }
    }

    // Self-avoidance after every move, on packed coordinates: distinct
    // vertices ⇔ distinct codes since |y| ≤ n < 2n+1.
    let k = 2 * b + 1;
    for s in 1..=t {
        let codes: Vec<VarId> = (0..=n)
            .map(|v| {
                let c = p.declare_var(&format!("code_{s}_{v}"), -(k * b + b), k * b + b).unwrap();
                let a = linear(&mut p, vec![(1, c), (-k, x[s][v]), (-1, y[s][v])], Rel::Eq, 0);
                force_true(&mut p, a);
                c
            })
            .collect();
        for u in 0..=n {
            for v in u + 1..=n {
                let a = linear(&mut p, vec![(1, codes[u]), (-1, codes[v])], Rel::Ne, 0);
                force_true(&mut p, a);
            }
        }
    }
    debug_assert_eq!(p.validate(), Ok(()));
    p
}

fn encode_grounded(inst: &RfInstance) -> Program {
    let n = inst.n_segments;
    let t = inst.t_moves;
    let b = n as i64;
    let mut p = Program::new();
    let pivots = pivot_grid(inst, &mut p);

    // Functional position grids: tfoldx_s_v_X ⇔ vertex v has x = X after
    // step s. Derived, never guessed, so each model carries exactly the
    // trajectory of its pivot sequence.
    let coord = |p: &mut Program, axis: &str, s: usize, v: usize, val: i64| {
        p.intern_atom(&format!("tfold{axis}_{s}_{v}_{}", tok(val)))
    };
    for v in 0..=n {
        let a = coord(&mut p, "x", 0, v, v as i64);
        p.rules.push(Rule::fact(a));
        let a = coord(&mut p, "y", 0, v, 0);
        p.rules.push(Rule::fact(a));
    }
    for s in 1..=t {
        // Step-local helper atoms: chosen direction, chosen center
        // coordinates, and which vertices rotate.
        let dircw = p.intern_atom(&format!("dircw_{s}"));
        let dirccw = p.intern_atom(&format!("dirccw_{s}"));
        let mut act = vec![];
        for v in 0..=n {
            act.push(p.intern_atom(&format!("act_{s}_{v}")));
        }
        let mut cenx = vec![];
        let mut ceny = vec![];
        for val in -b..=b {
            cenx.push(p.intern_atom(&format!("cenx_{s}_{}", tok(val))));
            ceny.push(p.intern_atom(&format!("ceny_{s}_{}", tok(val))));
        }
        let cen_at = |row: &[AtomId], val: i64| row[(val + b) as usize];
        for &(i, dir, pivot) in &pivots[s - 1] {
            let d = if dir == Dir::Cw { dircw } else { dirccw };
            p.rules.push(Rule { head: Head::Atom(d), pos: vec![pivot], neg: vec![], negneg: vec![] });
            for &moved in &act[i..=n] {
                p.rules.push(Rule {
                    head: Head::Atom(moved),
                    pos: vec![pivot],
                    neg: vec![],
                    negneg: vec![],
                });
            }
            for val in -b..=b {
                let prev = coord(&mut p, "x", s - 1, i - 1, val);
                p.rules.push(Rule {
                    head: Head::Atom(cen_at(&cenx, val)),
                    pos: vec![pivot, prev],
                    neg: vec![],
                    negneg: vec![],
                });
                let prev = coord(&mut p, "y", s - 1, i - 1, val);
                p.rules.push(Rule {
                    head: Head::Atom(cen_at(&ceny, val)),
                    pos: vec![pivot, prev],
                    neg: vec![],
                    negneg: vec![],
                });
            }
            // Vertices before the pivot keep their position.
            for v in 0..i {
                for val in -b..=b {
                    for axis in ["x", "y"] {
                        let prev = coord(&mut p, axis, s - 1, v, val);
                        let cur = coord(&mut p, axis, s, v, val);
                        p.rules.push(Rule {
                            head: Head::Atom(cur),
                            pos: vec![pivot, prev],
                            neg: vec![],
                            negneg: vec![],
                        });
                    }
                }
            }
        }
        // Offsets from the center, shared by both rotation directions:
        // dy_s_v_E ⇔ y_{s−1}_v − cy = E, and likewise dx.
        for v in 0..=n {
            for cval in -b..=b {
                for pval in -b..=b {
                    let e = pval - cval;
                    let dy = p.intern_atom(&format!("dy_{s}_{v}_{}", tok(e)));
                    let prev = coord(&mut p, "y", s - 1, v, pval);
                    p.rules.push(Rule {
                        head: Head::Atom(dy),
                        pos: vec![cen_at(&ceny, cval), prev],
                        neg: vec![],
                        negneg: vec![],
                    });
                    let dx = p.intern_atom(&format!("dx_{s}_{v}_{}", tok(e)));
                    let prev = coord(&mut p, "x", s - 1, v, pval);
                    p.rules.push(Rule {
                        head: Head::Atom(dx),
                        pos: vec![cen_at(&cenx, cval), prev],
                        neg: vec![],
                        negneg: vec![],
                    });
                }
            }
        }
        // Rotation results: cw sends (x, y) to (cx + dy, cy − dx), ccw to
        // (cx − dy, cy + dx).
        for v in 0..=n {
            for cval in -b..=b {
                for e in -2 * b..=2 * b {
                    let dy = p.atom_id(&format!("dy_{s}_{v}_{}", tok(e))).unwrap();
                    let dx = p.atom_id(&format!("dx_{s}_{v}_{}", tok(e))).unwrap();
                    for (dir_atom, res, delta, axis) in [
                        (dircw, cval + e, dy, "x"),
                        (dirccw, cval - e, dy, "x"),
                        (dircw, cval - e, dx, "y"),
                        (dirccw, cval + e, dx, "y"),
                    ] {
                        if res.abs() > b {
                            continue;
                        }
                        let cen = if axis == "x" { cen_at(&cenx, cval) } else { cen_at(&ceny, cval) };
                        let cur = coord(&mut p, axis, s, v, res);
                        p.rules.push(Rule {
                            head: Head::Atom(cur),
                            pos: vec![act[v], dir_atom, cen, delta],
                            neg: vec![],
                            negneg: vec![],
                        });
                    }
                }
            }
        }
        // No two vertices on the same cell after the move.
        for u in 0..=n {
            for v in u + 1..=n {
                for xv in -b..=b {
                    for yv in -b..=b {
                        let ux = coord(&mut p, "x", s, u, xv);
                        let uy = coord(&mut p, "y", s, u, yv);
                        let vx = coord(&mut p, "x", s, v, xv);
                        let vy = coord(&mut p, "y", s, v, yv);
                        p.rules.push(Rule::falsum(vec![ux, uy, vx, vy], vec![]));
                    }
                }
            }
        }
    }
    // The final configuration must be the goal.
    for v in 0..=n {
        let a = coord(&mut p, "x", t, v, inst.goal[v].0);
        p.rules.push(Rule::falsum(vec![], vec![a]));
        let a = coord(&mut p, "y", t, v, inst.goal[v].1);
        p.rules.push(Rule::falsum(vec![], vec![a]));
    }
    debug_assert_eq!(p.validate(), Ok(()));
    p
}

/// A decoded move sequence, one `(segment, dir)` per step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfSolution {
    pub moves: Vec<(usize, Dir)>,
}

/// Read the move sequence back out of a solution file: the explicit
/// `moves` list if present, otherwise the `pivot_s_i_d` atoms.
pub fn decode(inst: &RfInstance, sol: &SolutionFile) -> Result<RfSolution, String> {
    let t = inst.t_moves;
    let mut moves: Vec<Option<(usize, Dir)>> = vec![None; t];
    let mut record = |step: usize, seg: usize, dir: Dir| -> Result<(), String> {
        if !(1..=t).contains(&step) {
            return Err(format!("move step {step} out of range 1..={t}"));
        }
        match moves[step - 1].replace((seg, dir)) {
            Some(prev) if prev != (seg, dir) => Err(format!("two moves at step {step}")),
            _ => Ok(()),
        }
    };
    if !sol.moves.is_empty() {
        for m in &sol.moves {
            record(m.step, m.segment, m.dir)?;
        }
    } else {
        for name in &sol.true_atoms {
            let parts: Vec<&str> = name.split('_').collect();
            if let ["pivot", s, i, d] = parts.as_slice() {
                let s: usize = s.parse().map_err(|_| format!("bad atom {name}"))?;
                let i: usize = i.parse().map_err(|_| format!("bad atom {name}"))?;
                let dir = match *d {
                    "cw" => Dir::Cw,
                    "ccw" => Dir::Ccw,
                    _ => return Err(format!("bad direction in {name}")),
                };
                record(s, i, dir)?;
            }
        }
    }
    let moves = moves
        .into_iter()
        .enumerate()
        .map(|(s, m)| m.ok_or(format!("no move at step {}", s + 1)))
        .collect::<Result<_, _>>()?;
    Ok(RfSolution { moves })
}

/// Check a move sequence against the instance alone by replaying it:
/// exactly `t` in-range moves, all vertices distinct after every move,
/// goal reached at the end.
pub fn verify(inst: &RfInstance, sol: &RfSolution) -> Result<(), String> {
    let n = inst.n_segments;
    if sol.moves.len() != inst.t_moves {
        return Err(format!(
            "expected exactly {} moves, got {}",
            inst.t_moves,
            sol.moves.len()
        ));
    }
    let mut pts = initial_chain(n);
    for (idx, &(seg, dir)) in sol.moves.iter().enumerate() {
        if !(1..=n).contains(&seg) {
            return Err(format!("move {} pivots unknown segment {seg}", idx + 1));
        }
        apply_move(&mut pts, seg, dir);
        if !all_distinct(&pts) {
            return Err(format!("chain self-intersects after move {}", idx + 1));
        }
    }
    if pts != inst.goal {
        return Err("the final configuration does not match the goal".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use crate::benchmarks::{solution_file, Instance};
    use crate::integration::{
        enumerate_all, solve_with_schema, BlockingMode, CaspOutcome, Schema, SolveConfig,
    };

    /// Every valid move sequence by brute-force replay.
    fn exhaustive_solutions(inst: &RfInstance) -> BTreeSet<String> {
        let n = inst.n_segments;
        let mut all_moves = vec![];
        for i in 1..=n {
            for dir in [Dir::Cw, Dir::Ccw] {
                all_moves.push((i, dir));
            }
        }
        let mut out = BTreeSet::new();
        let mut seq = vec![];
        fn rec(
            inst: &RfInstance,
            all_moves: &[(usize, Dir)],
            seq: &mut Vec<(usize, Dir)>,
            out: &mut BTreeSet<String>,
        ) {
            if seq.len() == inst.t_moves {
                let sol = RfSolution { moves: seq.clone() };
                if verify(inst, &sol).is_ok() {
                    out.insert(format!("{sol:?}"));
                }
                return;
            }
            for &m in all_moves {
                seq.push(m);
                rec(inst, all_moves, seq, out);
                seq.pop();
            }
        }
        rec(inst, &all_moves, &mut seq, &mut out);
        out
    }

    #[test]
    fn replay_follows_the_rotation_convention() {
        // Pivot the last segment of a 2-chain clockwise around (1, 0).
        let inst = RfInstance {
            seed: 0,
            n_segments: 2,
            t_moves: 1,
            goal: vec![(0, 0), (1, 0), (1, -1)],
        };
        inst.validate().unwrap();
        verify(&inst, &RfSolution { moves: vec![(2, Dir::Cw)] }).unwrap();
        assert!(verify(&inst, &RfSolution { moves: vec![(2, Dir::Ccw)] }).is_err());
        // Counterclockwise lands on the other side.
        let inst = RfInstance { goal: vec![(0, 0), (1, 0), (1, 1)], ..inst };
        verify(&inst, &RfSolution { moves: vec![(2, Dir::Ccw)] }).unwrap();
    }

    #[test]
    fn generated_instances_are_deterministic_and_valid() {
        for (n, t) in [(1, 1), (3, 2), (5, 3), (8, 5), (4, 0)] {
            for seed in 0..3 {
                let a = gen(n, t, seed).unwrap();
                assert_eq!(a, gen(n, t, seed).unwrap());
                a.validate().unwrap();
            }
        }
        assert!(gen(0, 1, 0).is_err());
        assert!(gen(9, 1, 0).is_err());
        assert!(gen(3, 6, 0).is_err());
    }

    #[test]
    fn pure_asp_is_propositional_and_pure_csp_is_rejected() {
        let inst = gen(3, 2, 1).unwrap();
        let asp = encode(&inst, Encoding::PureAsp);
        assert!(asp.constraint_atoms().next().is_none());
        assert!(asp.decls.is_empty());
        let hybrid = encode(&inst, Encoding::TrueCasp);
        assert!(hybrid.constraint_atoms().next().is_some());
        // Move selection stays regular even in the hybrid encoding.
        assert!(hybrid.atom_ids_iter().any(|a| hybrid.atom_name(a).starts_with("pivot_")));
        let err = Instance::Rf(inst).encode(Encoding::PureCsp).unwrap_err();
        assert!(matches!(err, DomainError::UnsupportedEncoding { .. }));
    }

    #[test]
    fn encodings_print_and_reparse_losslessly() {
        let inst = gen(2, 1, 3).unwrap();
        for enc in [Encoding::PureAsp, Encoding::TrueCasp] {
            let p = encode(&inst, enc);
            let text = p.to_text();
            let back = crate::program::parse_program(&text)
                .unwrap_or_else(|e| panic!("{enc}: reparse failed: {e}"));
            assert_eq!(back.to_text(), text, "{enc}");
        }
    }

    #[test]
    fn model_counts_match_exhaustive_replay_across_encodings() {
        for (n, t, seed) in [(2, 2, 1), (3, 2, 2)] {
            let inst = gen(n, t, seed).unwrap();
            let want = exhaustive_solutions(&inst);
            assert!(!want.is_empty(), "generated instances are satisfiable");
            for enc in [Encoding::PureAsp, Encoding::TrueCasp] {
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
                assert_eq!(got, want, "n={n} t={t} seed={seed} {enc}");
            }
        }
    }

    #[test]
    fn every_schema_solves_and_verifies_generated_instances() {
        let inst = gen(4, 2, 5).unwrap();
        let wrapped = Instance::Rf(inst.clone());
        for enc in [Encoding::PureAsp, Encoding::TrueCasp] {
            let p = encode(&inst, enc);
            for schema in Schema::ALL {
                let cfg = SolveConfig::with_schema(schema);
                let (out, _) = solve_with_schema(&p, &cfg);
                let sol = match out {
                    CaspOutcome::Sat(s) => s,
                    other => panic!("{enc}/{schema}: expected sat, got {other:?}"),
                };
                let file = solution_file(&p, &sol);
                wrapped.verify(&file).unwrap_or_else(|e| panic!("{enc}/{schema}: {e}"));
            }
        }
    }

    #[test]
    fn zero_move_instances_reduce_to_configuration_equality() {
        let stay = RfInstance {
            seed: 0,
            n_segments: 3,
            t_moves: 0,
            goal: initial_chain(3),
        };
        let bent = RfInstance {
            goal: vec![(0, 0), (1, 0), (2, 0), (2, 1)],
            ..stay.clone()
        };
        for enc in [Encoding::PureAsp, Encoding::TrueCasp] {
            for (inst, expect_sat) in [(&stay, true), (&bent, false)] {
                let p = encode(inst, enc);
                let (out, _) = solve_with_schema(&p, &SolveConfig::default());
                match (expect_sat, out) {
                    (true, CaspOutcome::Sat(_)) | (false, CaspOutcome::Unsat) => {}
                    (want, got) => panic!("{enc}: want sat={want}, got {got:?}"),
                }
            }
        }
    }
}
