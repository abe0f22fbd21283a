//! The experiment-matrix runner behind `troika bench`.
//!
//! A [`MatrixConfig`] lists instance coordinates (domains × sizes × seeds)
//! and solver coordinates (encodings × schemas × blocking modes) plus a
//! per-run wall budget. [`run_matrix`] expands the cross product — skipping
//! encoding/domain pairs the domain does not support — runs every
//! [`RunSpec`] to a [`RunRecord`], and returns a [`MatrixReport`] that can
//! render the CSV, a per-(schema, encoding) totals table, and the
//! cross-schema agreement audit.
//!
//! Runs are independent (each owns its solver state), so the runner may
//! execute them on parallel workers; records are sorted by
//! (domain, instance, encoding, schema) before any output, making the CSV
//! deterministic apart from the `wall_ms` column.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Deserialize;
use troika::benchmarks::solution_file;
use troika::{
    solve_with_schema, BlockingMode, CaspOutcome, Domain, Encoding, Instance, RunStats, Schema,
    SolveConfig,
};

/// The exact header of the stats CSV; every row has these 14 fields.
pub const CSV_HEADER: &str = "domain,encoding,instance,schema,blocking,result,wall_ms,decisions,\
                              conflicts,candidates,theory_calls,theory_conflicts,\
                              base_instantiations,learned_count";

/// Instance sizes for one domain of the matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainPlan {
    pub domain: Domain,
    /// Scalar sizes (leaves / jobs / segments), or `[segments, moves]`
    /// pairs for `rf`.
    pub sizes: Vec<SizeSpec>,
    /// Per-domain override of the global `minimize_core` flag. Core
    /// minimization pays off when conflicts have small arithmetic cores
    /// (wseq cost bounds, is penalty bounds) and hurts when deletion
    /// probes must re-search a large coupled system (rf motion rows).
    #[serde(default)]
    pub minimize_core: Option<bool>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    Scalar(usize),
    Pair(usize, usize),
}

impl SizeSpec {
    /// `(n, t)` with the move count defaulting to 2 for scalar sizes.
    pub fn coords(self) -> (usize, usize) {
        match self {
            SizeSpec::Scalar(n) => (n, 2),
            SizeSpec::Pair(n, t) => (n, t),
        }
    }
}

fn default_encodings() -> Vec<Encoding> {
    Encoding::ALL.to_vec()
}

fn default_schemas() -> Vec<Schema> {
    Schema::ALL.to_vec()
}

fn default_blocking() -> Vec<BlockingMode> {
    vec![BlockingMode::Theory]
}

fn default_timeout() -> f64 {
    10.0
}

/// JSON config for `troika bench`: one array per matrix axis.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub domains: Vec<DomainPlan>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_encodings")]
    pub encodings: Vec<Encoding>,
    #[serde(default = "default_schemas")]
    pub schemas: Vec<Schema>,
    #[serde(default = "default_blocking")]
    pub blocking: Vec<BlockingMode>,
    #[serde(default)]
    pub minimize_core: bool,
    /// Per-run wall budget in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    /// Parallel workers; absent = one per logical CPU, 1 = sequential.
    #[serde(default)]
    pub workers: Option<usize>,
}

/// One fully-specified run of the matrix.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub domain: Domain,
    pub encoding: Encoding,
    pub instance: Instance,
    pub schema: Schema,
    pub blocking: BlockingMode,
    pub seed: u64,
    pub timeout_s: f64,
    pub minimize_core: bool,
}

/// The outcome of one run: the spec coordinates flattened to strings, the
/// result, and every counter. One CSV row per record.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub domain: String,
    pub encoding: String,
    pub instance: String,
    pub schema: String,
    pub blocking: String,
    pub seed: u64,
    pub timeout_s: f64,
    pub minimize_core: bool,
    /// `sat`, `unsat`, `timeout`, or `error`.
    pub result: String,
    pub wall_ms: u64,
    pub stats: RunStats,
    /// For `sat` rows: whether the independent domain verifier accepted
    /// the decoded solution.
    pub verify_ok: Option<bool>,
    /// Failure detail for `error` rows and verification rejections.
    pub note: Option<String>,
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.domain,
            self.encoding,
            self.instance,
            self.schema,
            self.blocking,
            self.result,
            self.wall_ms,
            self.stats.base.decisions,
            self.stats.base.conflicts,
            self.stats.candidates,
            self.stats.theory_calls,
            self.stats.theory_conflicts,
            self.stats.base_instantiations,
            self.stats.base.learned_count,
        )
    }

    fn sort_key(&self) -> (&str, &str, &str, &str, &str) {
        (&self.domain, &self.instance, &self.encoding, &self.schema, &self.blocking)
    }
}

/// Expand the config into the ordered list of runs. Instances are
/// generated here (deterministically per seed); unsupported
/// domain/encoding pairs are skipped entirely.
pub fn expand_specs(cfg: &MatrixConfig) -> Result<Vec<RunSpec>> {
    let mut specs = Vec::new();
    for plan in &cfg.domains {
        let minimize_core = plan.minimize_core.unwrap_or(cfg.minimize_core);
        for &size in &plan.sizes {
            let (n, t) = size.coords();
            for &seed in &cfg.seeds {
                let instance = troika::generate(plan.domain, n, t, seed).with_context(|| {
                    format!("cannot generate {} instance n={n} t={t} seed={seed}", plan.domain)
                })?;
                for &encoding in &cfg.encodings {
                    if !encoding.supports(plan.domain) {
                        continue;
                    }
                    for &schema in &cfg.schemas {
                        for &blocking in &cfg.blocking {
                            specs.push(RunSpec {
                                domain: plan.domain,
                                encoding,
                                instance: instance.clone(),
                                schema,
                                blocking,
                                seed,
                                timeout_s: cfg.timeout_s,
                                minimize_core,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(specs)
}

/// Execute one run. Panics and encoding failures become `error` records;
/// the matrix keeps going.
pub fn run_one(spec: &RunSpec) -> RunRecord {
    let started = Instant::now();
    let attempt = catch_unwind(AssertUnwindSafe(|| -> Result<_, String> {
        let program = spec.instance.encode(spec.encoding).map_err(|e| e.to_string())?;
        let cfg = SolveConfig {
            schema: spec.schema,
            blocking: spec.blocking,
            minimize_core: spec.minimize_core,
            budget: Some(Duration::from_secs_f64(spec.timeout_s)),
        };
        let (outcome, stats) = solve_with_schema(&program, &cfg);
        let (result, verify_ok, note) = match outcome {
            CaspOutcome::Sat(sol) => {
                let file = solution_file(&program, &sol);
                match spec.instance.verify(&file) {
                    Ok(()) => ("sat", Some(true), None),
                    Err(msg) => ("sat", Some(false), Some(msg)),
                }
            }
            CaspOutcome::Unsat => ("unsat", None, None),
            CaspOutcome::Budget => ("timeout", None, None),
        };
        Ok((result.to_string(), stats, verify_ok, note))
    }));
    let (result, stats, verify_ok, note) = match attempt {
        Ok(Ok(parts)) => parts,
        Ok(Err(msg)) => ("error".to_string(), RunStats::default(), None, Some(msg)),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            ("error".to_string(), RunStats::default(), None, Some(msg))
        }
    };
    let wall_ms = if result == "error" {
        started.elapsed().as_millis() as u64
    } else {
        stats.wall_ms
    };
    RunRecord {
        domain: spec.domain.to_string(),
        encoding: spec.encoding.to_string(),
        instance: spec.instance.label(),
        schema: spec.schema.to_string(),
        blocking: spec.blocking.to_string(),
        seed: spec.seed,
        timeout_s: spec.timeout_s,
        minimize_core: spec.minimize_core,
        result,
        wall_ms,
        stats,
        verify_ok,
        note,
    }
}

/// Run the whole matrix, in parallel when configured, and return the
/// sorted records.
pub fn run_matrix(cfg: &MatrixConfig) -> Result<MatrixReport> {
    let specs = expand_specs(cfg)?;
    let mut records: Vec<RunRecord> = match cfg.workers {
        Some(1) => specs.iter().map(run_one).collect(),
        workers => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.unwrap_or(0))
                .build()
                .context("cannot build worker pool")?;
            pool.install(|| specs.par_iter().map(run_one).collect())
        }
    };
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(MatrixReport { records })
}

/// All records of one matrix execution, sorted and ready to render.
#[derive(Debug, Clone)]
pub struct MatrixReport {
    pub records: Vec<RunRecord>,
}

impl MatrixReport {
    /// The full CSV: exact header plus one row per record.
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    /// Totals per (schema, encoding): run/result counts and summed
    /// counters, as a fixed-width text table.
    pub fn totals_table(&self) -> String {
        #[derive(Default)]
        struct Tot {
            runs: u64,
            sat: u64,
            unsat: u64,
            timeout: u64,
            error: u64,
            wall_ms: u64,
            candidates: u64,
            theory_calls: u64,
            conflicts: u64,
        }
        let mut groups: BTreeMap<(String, String), Tot> = BTreeMap::new();
        for r in &self.records {
            let t = groups.entry((r.schema.clone(), r.encoding.clone())).or_default();
            t.runs += 1;
            match r.result.as_str() {
                "sat" => t.sat += 1,
                "unsat" => t.unsat += 1,
                "timeout" => t.timeout += 1,
                _ => t.error += 1,
            }
            t.wall_ms += r.wall_ms;
            t.candidates += r.stats.candidates;
            t.theory_calls += r.stats.theory_calls;
            t.conflicts += r.stats.base.conflicts;
        }
        let mut out = String::new();
        out.push_str(&format!(
            "{:<7} {:<10} {:>5} {:>5} {:>6} {:>8} {:>6} {:>9} {:>11} {:>13} {:>10}\n",
            "schema",
            "encoding",
            "runs",
            "sat",
            "unsat",
            "timeout",
            "error",
            "wall_ms",
            "candidates",
            "theory_calls",
            "conflicts"
        ));
        for ((schema, encoding), t) in &groups {
            out.push_str(&format!(
                "{:<7} {:<10} {:>5} {:>5} {:>6} {:>8} {:>6} {:>9} {:>11} {:>13} {:>10}\n",
                schema,
                encoding,
                t.runs,
                t.sat,
                t.unsat,
                t.timeout,
                t.error,
                t.wall_ms,
                t.candidates,
                t.theory_calls,
                t.conflicts
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let count = |k: &str| self.records.iter().filter(|r| r.result == k).count();
        format!(
            "{} runs: {} sat, {} unsat, {} timeout, {} error",
            self.records.len(),
            count("sat"),
            count("unsat"),
            count("timeout"),
            count("error")
        )
    }

    /// Cross-schema agreement audit: for each (instance, encoding), every
    /// run that produced a definite result must agree on sat vs unsat.
    /// Returns one description per disagreeing group.
    pub fn disagreements(&self) -> Vec<String> {
        let mut groups: BTreeMap<(&str, &str), Vec<&RunRecord>> = BTreeMap::new();
        for r in &self.records {
            if r.result == "sat" || r.result == "unsat" {
                groups.entry((&r.instance, &r.encoding)).or_default().push(r);
            }
        }
        let mut out = Vec::new();
        for ((instance, encoding), rows) in groups {
            let disagree = rows.iter().any(|r| r.result != rows[0].result);
            if disagree {
                let detail: Vec<String> = rows
                    .iter()
                    .map(|r| format!("{}/{}={}", r.schema, r.blocking, r.result))
                    .collect();
                out.push(format!("{instance}/{encoding}: {}", detail.join(" ")));
            }
        }
        out
    }

    /// Sat rows whose solution the independent domain verifier rejected.
    pub fn verify_failures(&self) -> Vec<String> {
        self.records
            .iter()
            .filter(|r| r.verify_ok == Some(false))
            .map(|r| {
                format!(
                    "{}/{}/{}: sat solution failed verification: {}",
                    r.instance,
                    r.encoding,
                    r.schema,
                    r.note.as_deref().unwrap_or("(no detail)")
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> MatrixConfig {
        serde_json::from_str(json).expect("config parses")
    }

    #[test]
    fn scalar_sizes_default_the_second_coordinate() {
        assert_eq!(SizeSpec::Scalar(5).coords(), (5, 2));
        assert_eq!(SizeSpec::Pair(4, 3).coords(), (4, 3));
    }

    #[test]
    fn minimal_config_fills_every_axis_with_defaults() {
        let c = cfg(r#"{"domains": [{"domain": "wseq", "sizes": [4]}], "seeds": [1]}"#);
        assert_eq!(c.encodings, Encoding::ALL);
        assert_eq!(c.schemas, Schema::ALL);
        assert_eq!(c.blocking, [BlockingMode::Theory]);
        assert!(!c.minimize_core);
        assert_eq!(c.timeout_s, 10.0);
        assert_eq!(c.workers, None);
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let bad = r#"{"domains": [], "seeds": [], "budget": 5}"#;
        assert!(serde_json::from_str::<MatrixConfig>(bad).is_err());
    }

    #[test]
    fn expansion_skips_unsupported_pairs_and_applies_overrides() {
        let c = cfg(
            r#"{
                "domains": [
                    {"domain": "rf", "sizes": [[4, 2]]},
                    {"domain": "wseq", "sizes": [4], "minimize_core": true}
                ],
                "seeds": [1]
            }"#,
        );
        let specs = expand_specs(&c).unwrap();
        // rf supports two encodings, wseq all three; three schemas each.
        assert_eq!(specs.len(), 2 * 3 + 3 * 3);
        assert!(specs
            .iter()
            .all(|s| s.domain != Domain::Rf || s.encoding != Encoding::PureCsp));
        assert!(specs.iter().filter(|s| s.domain == Domain::Rf).all(|s| !s.minimize_core));
        assert!(specs.iter().filter(|s| s.domain == Domain::Wseq).all(|s| s.minimize_core));
    }

    #[test]
    fn records_round_trip_into_csv_rows_matching_the_header() {
        let c = cfg(
            r#"{
                "domains": [{"domain": "wseq", "sizes": [4]}],
                "seeds": [1],
                "encodings": ["pure-asp"],
                "schemas": ["clear"],
                "timeout_s": 30.0
            }"#,
        );
        let report = run_matrix(&c).unwrap();
        assert_eq!(report.records.len(), 1);
        let header_fields = CSV_HEADER.split(',').count();
        for r in &report.records {
            assert_eq!(r.csv_row().split(',').count(), header_fields);
            assert_eq!(r.result, "sat");
            assert_eq!(r.verify_ok, Some(true));
        }
        let csv = report.csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 2);
    }

    fn fake_record(schema: &str, result: &str) -> RunRecord {
        RunRecord {
            domain: "wseq".into(),
            encoding: "true-casp".into(),
            instance: "wseq-n4-s1".into(),
            schema: schema.into(),
            blocking: "theory".into(),
            seed: 1,
            timeout_s: 1.0,
            minimize_core: false,
            result: result.into(),
            wall_ms: 0,
            stats: troika::RunStats::default(),
            verify_ok: None,
            note: None,
        }
    }

    #[test]
    fn disagreements_catch_schemas_splitting_on_satisfiability() {
        let agree = MatrixReport {
            records: vec![fake_record("black", "sat"), fake_record("grey", "sat")],
        };
        assert!(agree.disagreements().is_empty());
        let split = MatrixReport {
            records: vec![fake_record("black", "sat"), fake_record("grey", "unsat")],
        };
        assert_eq!(split.disagreements().len(), 1);
    }

    #[test]
    fn sorting_is_by_domain_instance_encoding_schema() {
        let mut a = fake_record("grey", "sat");
        let mut b = fake_record("black", "sat");
        a.encoding = "pure-asp".into();
        b.encoding = "true-casp".into();
        let mut records = [b, a];
        records.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
        assert_eq!(records[0].encoding, "pure-asp");
        assert_eq!(records[1].encoding, "true-casp");
    }
}
