//! Incremental scheduling: every job runs on one instance of its fixed
//! device, starting at an integer time. Instances marked offline accept
//! no jobs, two jobs on the same device instance must not overlap,
//! precedences order completion before start, and each job finishing past
//! its deadline incurs tardiness weighted by its importance; the weighted
//! total must stay within `max_penalty`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{exactly_one, force_true, linear, var_eq, DomainError, Encoding, SolutionFile};
use crate::program::{AtomId, Head, Program, Rule, VarId};
use crate::theory::Rel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    /// Index into `devices`.
    pub device: usize,
    pub len: i64,
    pub deadline: i64,
    pub importance: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsInstance {
    pub seed: u64,
    /// Instance count per device; device ids are the indices.
    pub devices: Vec<usize>,
    pub jobs: Vec<Job>,
    /// `(before, after)` pairs of job indices: `after` starts no earlier
    /// than `before` finishes.
    pub precedences: Vec<(usize, usize)>,
    /// `(device, instance)` pairs that accept no jobs.
    pub offline: Vec<(usize, usize)>,
    pub max_penalty: i64,
    pub horizon: i64,
}

impl IsInstance {
    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |msg: String| Err(DomainError::BadInstance(msg));
        if self.jobs.is_empty() || self.jobs.len() > 10 {
            return bad(format!("is needs between 1 and 10 jobs, got {}", self.jobs.len()));
        }
        if !(1..=40).contains(&self.horizon) {
            return bad(format!("horizon must lie in [1, 40], got {}", self.horizon));
        }
        if self.devices.is_empty() || self.devices.iter().any(|&c| !(1..=4).contains(&c)) {
            return bad("each device needs 1 to 4 instances".into());
        }
        for (j, job) in self.jobs.iter().enumerate() {
            if job.device >= self.devices.len() {
                return bad(format!("job {j} names unknown device {}", job.device));
            }
            if job.len < 1 || job.len > self.horizon {
                return bad(format!("job {j} length {} does not fit the horizon", job.len));
            }
            if job.deadline < 0 || job.importance < 0 || job.importance > 100 {
                return bad(format!("job {j} has a negative deadline or bad importance"));
            }
        }
        for &(a, b) in &self.precedences {
            if a >= self.jobs.len() || b >= self.jobs.len() || a == b {
                return bad(format!("precedence ({a}, {b}) names invalid jobs"));
            }
        }
        for &(d, i) in &self.offline {
            if d >= self.devices.len() || i >= self.devices[d] {
                return bad(format!("offline entry ({d}, {i}) names an unknown instance"));
            }
        }
        if self.max_penalty < 0 {
            return bad("max_penalty must be nonnegative".into());
        }
        Ok(())
    }

    /// Instances of job `j`'s device that are not offline.
    fn allowed_instances(&self, j: usize) -> Vec<usize> {
        let d = self.jobs[j].device;
        (0..self.devices[d]).filter(|&i| !self.offline.contains(&(d, i))).collect()
    }

    /// Start times that keep job `j` inside the horizon.
    fn start_range(&self, j: usize) -> std::ops::RangeInclusive<i64> {
        0..=(self.horizon - self.jobs[j].len)
    }
}

/// Generate an instance. Horizons and penalty bounds are drawn tight
/// enough that both satisfiable and unsatisfiable instances occur.
pub fn gen(n_jobs: usize, seed: u64) -> Result<IsInstance, DomainError> {
    if !(1..=10).contains(&n_jobs) {
        return Err(DomainError::BadParameter(format!(
            "is size must be between 1 and 10 jobs, got {n_jobs}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_add((n_jobs as u64).wrapping_mul(0xD1B54A32D192ED03)),
    );
    let n_devices = if n_jobs > 3 { 2 } else { 1 };
    let devices: Vec<usize> = (0..n_devices).map(|_| rng.gen_range(1..=2)).collect();
    let jobs: Vec<Job> = (0..n_jobs)
        .map(|_| Job {
            device: rng.gen_range(0..n_devices),
            len: rng.gen_range(1..=3),
            deadline: 0, // filled in once the horizon is known
            importance: rng.gen_range(1..=3),
        })
        .collect();
    // Rough per-instance load, then a horizon between snug and roomy.
    let total_len: i64 = jobs.iter().map(|j| j.len).sum();
    let total_instances: usize = devices.iter().sum();
    let load = (total_len + total_instances as i64 - 1) / total_instances as i64;
    let max_len = jobs.iter().map(|j| j.len).max().unwrap();
    let horizon = (load + rng.gen_range(0..=max_len)).clamp(max_len, 40);
    let mut jobs = jobs;
    for job in &mut jobs {
        job.deadline = rng.gen_range(job.len..=horizon);
    }
    let mut precedences = vec![];
    for a in 0..n_jobs {
        for b in a + 1..n_jobs {
            if rng.gen_range(0..100) < 15 {
                precedences.push((a, b));
            }
        }
    }
    let mut offline = vec![];
    if rng.gen_range(0..100) < 25 {
        let candidates: Vec<usize> =
            (0..n_devices).filter(|&d| devices[d] >= 2).collect();
        if let Some(&d) = candidates.first() {
            offline.push((d, rng.gen_range(0..devices[d])));
        }
    }
    let max_penalty = rng.gen_range(0..=2 * n_jobs as i64);
    let inst =
        IsInstance { seed, devices, jobs, precedences, offline, max_penalty, horizon };
    inst.validate()?;
    Ok(inst)
}

/// Encode the instance. All encodings expose the same decisions — a start
/// time and a device instance per job, each guarded by exactly-one
/// scaffolding — and share propositional no-overlap rules over those
/// grids. They differ in what carries the numbers:
///
/// * `pure-asp`  — start grid and instance grid are regular atoms;
///   precedences become grid exclusions and the penalty bound a grounded
///   running-sum chain over the jobs.
/// * `true-casp` — instance selection stays regular; start times become
///   constraint variables (reified back onto the start grid), and
///   tardiness/penalty live in the theory.
/// * `pure-csp`  — instance selection moves into constraint variables
///   too; only scaffolding and no-overlap rules remain propositional.
pub fn encode(inst: &IsInstance, enc: Encoding) -> Program {
    let n = inst.jobs.len();
    let mut p = Program::new();

    // Decision grids: st[j] maps a start time to its atom, on[j] maps an
    // allowed instance to its atom.
    let mut st: Vec<Vec<(i64, AtomId)>> = Vec::with_capacity(n);
    let mut on: Vec<Vec<(usize, AtomId)>> = Vec::with_capacity(n);
    // Start vars for the constraint encodings, td vars likewise.
    let mut start_vars: Vec<Option<VarId>> = vec![None; n];

    for j in 0..n {
        let starts: Vec<i64> = inst.start_range(j).collect();
        match enc {
            Encoding::PureAsp => {
                let row: Vec<(i64, AtomId)> = starts
                    .iter()
                    .map(|&s| (s, p.intern_atom(&format!("st_{j}_{s}"))))
                    .collect();
                for &(_, a) in &row {
                    p.rules.push(Rule::choice(a));
                }
                st.push(row);
            }
            Encoding::TrueCasp | Encoding::PureCsp => {
                let v = p
                    .declare_var(&format!("start_{j}"), 0, inst.horizon - inst.jobs[j].len)
                    .unwrap();
                start_vars[j] = Some(v);
                st.push(starts.iter().map(|&s| (s, var_eq(&mut p, v, s))).collect());
            }
        }
        let allowed = inst.allowed_instances(j);
        match enc {
            Encoding::PureAsp | Encoding::TrueCasp => {
                let row: Vec<(usize, AtomId)> = allowed
                    .iter()
                    .map(|&i| (i, p.intern_atom(&format!("oninst_{j}_{i}"))))
                    .collect();
                for &(_, a) in &row {
                    p.rules.push(Rule::choice(a));
                }
                on.push(row);
            }
            Encoding::PureCsp => {
                let d = inst.jobs[j].device;
                let v = p
                    .declare_var(&format!("inst_{j}"), 0, (inst.devices[d] - 1) as i64)
                    .unwrap();
                on.push(allowed.iter().map(|&i| (i, var_eq(&mut p, v, i as i64))).collect());
            }
        }
    }
    for j in 0..n {
        let row: Vec<AtomId> = st[j].iter().map(|&(_, a)| a).collect();
        exactly_one(&mut p, &row);
        let row: Vec<AtomId> = on[j].iter().map(|&(_, a)| a).collect();
        exactly_one(&mut p, &row);
    }

    // No overlap: same device, same instance, clashing start pair.
    for j in 0..n {
        for k in j + 1..n {
            if inst.jobs[j].device != inst.jobs[k].device {
                continue;
            }
            for &(i, on_j) in &on[j] {
                let Some(&(_, on_k)) = on[k].iter().find(|&&(i2, _)| i2 == i) else {
                    continue;
                };
                for &(s, st_j) in &st[j] {
                    for &(t, st_k) in &st[k] {
                        if s < t + inst.jobs[k].len && t < s + inst.jobs[j].len {
                            p.rules.push(Rule::falsum(vec![on_j, on_k, st_j, st_k], vec![]));
                        }
                    }
                }
            }
        }
    }

    // Precedences.
    for &(a, b) in &inst.precedences {
        match enc {
            Encoding::PureAsp => {
                for &(s, st_a) in &st[a] {
                    for &(t, st_b) in &st[b] {
                        if t < s + inst.jobs[a].len {
                            p.rules.push(Rule::falsum(vec![st_a, st_b], vec![]));
                        }
                    }
                }
            }
            Encoding::TrueCasp | Encoding::PureCsp => {
                let atom = linear(
                    &mut p,
                    vec![(1, start_vars[a].unwrap()), (-1, start_vars[b].unwrap())],
                    Rel::Le,
                    -inst.jobs[a].len,
                );
                force_true(&mut p, atom);
            }
        }
    }

    // Tardiness and the penalty bound.
    match enc {
        Encoding::PureAsp => encode_penalty_grounded(inst, &mut p, &st),
        Encoding::TrueCasp | Encoding::PureCsp => {
            let mut terms = vec![];
            for j in 0..n {
                let td = p.declare_var(&format!("td_{j}"), 0, inst.horizon).unwrap();
                // td_j ≥ start_j + len_j − deadline_j (and ≥ 0 by domain);
                // a witness can always pick the exact tardiness.
                let atom = linear(
                    &mut p,
                    vec![(1, start_vars[j].unwrap()), (-1, td)],
                    Rel::Le,
                    inst.jobs[j].deadline - inst.jobs[j].len,
                );
                force_true(&mut p, atom);
                terms.push((inst.jobs[j].importance, td));
            }
            let total = linear(&mut p, terms, Rel::Le, inst.max_penalty);
            force_true(&mut p, total);
        }
    }
    debug_assert_eq!(p.validate(), Ok(()));
    p
}

/// Grounded penalty bound: a running weighted-tardiness sum over jobs in
/// index order, capped at `max_penalty`.
fn encode_penalty_grounded(inst: &IsInstance, p: &mut Program, st: &[Vec<(i64, AtomId)>]) {
    let contrib = |j: usize, s: i64| -> i64 {
        let job = &inst.jobs[j];
        job.importance * (s + job.len - job.deadline).max(0)
    };
    let mut sums: Vec<(i64, Option<AtomId>)> = vec![(0, None)];
    for j in 0..inst.jobs.len() {
        let mut next: std::collections::BTreeMap<i64, AtomId> = Default::default();
        for &(acc, up_prev) in &sums {
            for &(s, st_atom) in &st[j] {
                let total = acc + contrib(j, s);
                let mut body = vec![st_atom];
                body.extend(up_prev);
                if total > inst.max_penalty {
                    p.rules.push(Rule::falsum(body, vec![]));
                } else {
                    let up = *next
                        .entry(total)
                        .or_insert_with(|| p.intern_atom(&format!("penup_{j}_{total}")));
                    p.rules.push(Rule { head: Head::Atom(up), pos: body, neg: vec![], negneg: vec![] });
                }
            }
        }
        sums = next.into_iter().map(|(v, a)| (v, Some(a))).collect();
        if sums.is_empty() {
            // Every continuation overshoots; the falsum rules above
            // already make the program unsatisfiable.
            return;
        }
    }
}

/// A decoded schedule: start time and device instance per job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsSolution {
    pub starts: Vec<i64>,
    pub instances: Vec<usize>,
}

/// Read the schedule back out of a solution file: starts come from
/// `start_j` assignments or `st_j_s` atoms, instances from `inst_j`
/// assignments or `oninst_j_i` atoms.
pub fn decode(inst: &IsInstance, sol: &SolutionFile) -> Result<IsSolution, String> {
    let n = inst.jobs.len();
    let mut starts: Vec<Option<i64>> = vec![None; n];
    let mut instances: Vec<Option<usize>> = vec![None; n];
    if sol.assignments.contains_key("start_0") {
        for (j, slot) in starts.iter_mut().enumerate() {
            let v = *sol
                .assignments
                .get(&format!("start_{j}"))
                .ok_or_else(|| format!("missing assignment start_{j}"))?;
            *slot = Some(v);
        }
    }
    if sol.assignments.contains_key("inst_0") {
        for (j, slot) in instances.iter_mut().enumerate() {
            let v = *sol
                .assignments
                .get(&format!("inst_{j}"))
                .ok_or_else(|| format!("missing assignment inst_{j}"))?;
            if v < 0 {
                return Err(format!("inst_{j} is negative"));
            }
            *slot = Some(v as usize);
        }
    }
    for name in &sol.true_atoms {
        let parts: Vec<&str> = name.split('_').collect();
        match parts.as_slice() {
            ["st", j, s] => {
                let j: usize = j.parse().map_err(|_| format!("bad atom {name}"))?;
                let s: i64 = s.parse().map_err(|_| format!("bad atom {name}"))?;
                if j >= n || starts[j].replace(s).is_some_and(|old| old != s) {
                    return Err(format!("conflicting start for job {j}"));
                }
            }
            ["oninst", j, i] => {
                let j: usize = j.parse().map_err(|_| format!("bad atom {name}"))?;
                let i: usize = i.parse().map_err(|_| format!("bad atom {name}"))?;
                if j >= n || instances[j].replace(i).is_some_and(|old| old != i) {
                    return Err(format!("conflicting instance for job {j}"));
                }
            }
            _ => {}
        }
    }
    let starts = starts
        .into_iter()
        .enumerate()
        .map(|(j, s)| s.ok_or(format!("no start time for job {j}")))
        .collect::<Result<_, _>>()?;
    let instances = instances
        .into_iter()
        .enumerate()
        .map(|(j, i)| i.ok_or(format!("no instance for job {j}")))
        .collect::<Result<_, _>>()?;
    Ok(IsSolution { starts, instances })
}

/// Check a decoded schedule against the instance alone — bounds, offline
/// map, overlaps, precedences, and the exact weighted-tardiness bound,
/// all recomputed from scratch.
pub fn verify(inst: &IsInstance, sol: &IsSolution) -> Result<(), String> {
    let n = inst.jobs.len();
    if sol.starts.len() != n || sol.instances.len() != n {
        return Err(format!("schedule must cover exactly {n} jobs"));
    }
    for j in 0..n {
        let job = &inst.jobs[j];
        let (s, i) = (sol.starts[j], sol.instances[j]);
        if s < 0 || s + job.len > inst.horizon {
            return Err(format!("job {j} runs outside the horizon: start {s}"));
        }
        if i >= inst.devices[job.device] {
            return Err(format!("job {j} uses unknown instance {i}"));
        }
        if inst.offline.contains(&(job.device, i)) {
            return Err(format!("job {j} uses offline instance ({}, {i})", job.device));
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            if inst.jobs[j].device != inst.jobs[k].device
                || sol.instances[j] != sol.instances[k]
            {
                continue;
            }
            let (s, t) = (sol.starts[j], sol.starts[k]);
            if s < t + inst.jobs[k].len && t < s + inst.jobs[j].len {
                return Err(format!("jobs {j} and {k} overlap on the same instance"));
            }
        }
    }
    for &(a, b) in &inst.precedences {
        if sol.starts[b] < sol.starts[a] + inst.jobs[a].len {
            return Err(format!("precedence ({a}, {b}) violated"));
        }
    }
    let mut penalty: i64 = 0;
    for j in 0..n {
        let job = &inst.jobs[j];
        penalty += job.importance * (sol.starts[j] + job.len - job.deadline).max(0);
    }
    if penalty > inst.max_penalty {
        return Err(format!("total penalty {penalty} exceeds bound {}", inst.max_penalty));
    }
    Ok(())
}
