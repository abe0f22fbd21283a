//! Seeded random generator of small ground programs, used to
//! differential-test the solving pipeline against the exhaustive oracle.
//! Test infrastructure, not part of the solver proper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::program::{AtomId, Head, Program, Rule, VarId};
use crate::theory::{ConstraintExpr, Rel};

/// Size caps for generated programs. The defaults keep the total atom
/// count within what [`Program::enumerate_answer_sets_oracle`] accepts.
#[derive(Debug, Clone)]
pub struct GenLimits {
    pub max_regular_atoms: usize,
    pub max_constraint_atoms: usize,
    pub max_vars: usize,
    /// Maximum number of values per variable domain.
    pub max_domain_width: i64,
    pub max_rules: usize,
    pub max_body: usize,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits {
            max_regular_atoms: 10,
            max_constraint_atoms: 3,
            max_vars: 2,
            max_domain_width: 5,
            max_rules: 12,
            max_body: 3,
        }
    }
}

/// Deterministic random program for a seed, under the default limits.
pub fn random_program(seed: u64) -> Program {
    random_program_with(seed, &GenLimits::default())
}

pub fn random_program_with(seed: u64, lim: &GenLimits) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Program::new();

    let n_vars = rng.gen_range(1..=lim.max_vars.max(1));
    for i in 0..n_vars {
        let lo = rng.gen_range(-3..=3i64);
        let width = rng.gen_range(0..lim.max_domain_width.max(1));
        p.declare_var(&format!("v{i}"), lo, lo + width);
    }

    let n_reg = rng.gen_range(1..=lim.max_regular_atoms.max(1));
    let regs: Vec<AtomId> = (0..n_reg).map(|i| p.intern_atom(&format!("a{i}"))).collect();

    let n_con = rng.gen_range(0..=lim.max_constraint_atoms);
    let mut cons: Vec<AtomId> = vec![];
    let mut attempts = 0;
    while cons.len() < n_con && attempts < 20 {
        attempts += 1;
        let id = p.intern_constraint_atom(random_expr(&mut rng, n_vars));
        if !cons.contains(&id) {
            cons.push(id);
        }
    }

    // Free choice over a random subset of the regular atoms, so model
    // counts vary; the rest only become true through rules.
    for &a in &regs {
        if rng.gen_bool(0.5) {
            p.rules.push(Rule::choice(a));
        }
    }

    let n_rules = rng.gen_range(0..=lim.max_rules);
    for _ in 0..n_rules {
        let head = if rng.gen_bool(0.15) {
            Head::Falsum
        } else {
            Head::Atom(regs[rng.gen_range(0..regs.len())])
        };
        let body_len = rng.gen_range(0..=lim.max_body);
        let mut pool: Vec<AtomId> = regs.iter().chain(cons.iter()).copied().collect();
        let (mut pos, mut neg, mut negneg) = (vec![], vec![], vec![]);
        for _ in 0..body_len {
            if pool.is_empty() {
                break;
            }
            let a = pool.swap_remove(rng.gen_range(0..pool.len()));
            match rng.gen_range(0..10) {
                0..=4 => pos.push(a),
                5..=8 => neg.push(a),
                _ => negneg.push(a),
            }
        }
        p.rules.push(Rule { head, pos, neg, negneg });
    }

    debug_assert!(p.validate().is_ok());
    p
}

fn random_expr(rng: &mut ChaCha8Rng, n_vars: usize) -> ConstraintExpr {
    let n_terms = rng.gen_range(1..=n_vars.min(2));
    let mut vars: Vec<u32> = (0..n_vars as u32).collect();
    let mut lhs: Vec<(i64, Option<VarId>)> = vec![];
    for _ in 0..n_terms {
        let v = vars.swap_remove(rng.gen_range(0..vars.len()));
        let mut coef = 0i64;
        while coef == 0 {
            coef = rng.gen_range(-3..=3);
        }
        lhs.push((coef, Some(VarId(v))));
    }
    let rel = [Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Eq, Rel::Ne][rng.gen_range(0..6)];
    let k = rng.gen_range(-6..=6i64);
    ConstraintExpr::new(lhs, rel, vec![(k, None)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_program() {
        for seed in [0, 1, 7, 99] {
            assert_eq!(random_program(seed), random_program(seed));
        }
    }

    #[test]
    fn generated_programs_fit_the_oracle() {
        for seed in 0..50 {
            let p = random_program(seed);
            assert!(p.n_atoms() <= 13, "seed {seed}: {} atoms", p.n_atoms());
            assert!(p.validate().is_ok());
            for d in &p.decls {
                assert!(d.hi - d.lo < 5, "domain wider than 5 values");
            }
        }
    }
}
