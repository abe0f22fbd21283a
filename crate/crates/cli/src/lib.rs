//! Command-line front end for the `troika` constraint answer set solver.
//!
//! Five subcommands cover the full workflow:
//!
//! * `solve`  — run one ground program through a chosen integration
//!   schema; prints the answer set, constraint witness, and run counters.
//! * `gen`    — generate a benchmark instance (JSON) for one of the three
//!   domains (`wseq`, `is`, `rf`), deterministically per seed.
//! * `encode` — turn an instance into a ground program under one of the
//!   encodings (`pure-asp`, `true-casp`, `pure-csp`).
//! * `verify` — check a solution file against its instance with the
//!   independent domain verifier.
//! * `bench`  — run a schema × encoding experiment matrix from a JSON
//!   config, emitting a stats CSV plus a per-(schema, encoding) totals
//!   table; see [`matrix`].
//!
//! `solve` exit codes are part of the contract: 10 sat, 20 unsat,
//! 30 timeout, 1 error. `verify` exits 0 on PASS and 1 on FAIL; `bench`
//! exits 2 when its cross-schema agreement audit fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use troika::benchmarks::solution_file;
use troika::{
    enumerate_all, parse_program, solve_with_schema, AtomKind, BlockingMode, CaspOutcome,
    CaspSolution, Domain, Encoding, Instance, Program, RunStats, Schema, SolutionFile,
    SolveConfig,
};

pub mod matrix;

/// Exit code for a satisfiable `solve` run.
pub const EXIT_SAT: i32 = 10;
/// Exit code for an unsatisfiable `solve` run.
pub const EXIT_UNSAT: i32 = 20;
/// Exit code when the wall-clock budget expires first.
pub const EXIT_TIMEOUT: i32 = 30;
/// Exit code for usage, IO, parse, and verification errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when `bench` completes but its agreement audit fails.
pub const EXIT_AUDIT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "troika",
    version,
    about = "Constraint answer set solver comparing black/grey/clear-box theory integration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a ground program (exit 10 sat / 20 unsat / 30 timeout / 1 error)
    Solve(SolveArgs),
    /// Generate a benchmark instance as JSON
    Gen(GenArgs),
    /// Encode an instance (file or freshly generated) as a ground program
    Encode(EncodeArgs),
    /// Verify a solution file against its instance; prints PASS or FAIL
    Verify(VerifyArgs),
    /// Run the experiment matrix from a JSON config and emit a stats CSV
    Bench(BenchArgs),
}

fn parse_schema(s: &str) -> Result<Schema, String> {
    s.parse()
}

fn parse_blocking(s: &str) -> Result<BlockingMode, String> {
    s.parse()
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    s.parse()
}

fn parse_encoding(s: &str) -> Result<Encoding, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Ground program file
    pub program: PathBuf,
    /// Integration schema: black | grey | clear
    #[arg(long, default_value = "clear", value_parser = parse_schema)]
    pub schema: Schema,
    /// What a blocking rule excludes after a theory rejection: model | theory
    #[arg(long, default_value = "theory", value_parser = parse_blocking)]
    pub blocking: BlockingMode,
    /// Shrink theory conflicts to a 1-minimal core before blocking
    #[arg(long)]
    pub minimize_core: bool,
    /// Wall-clock budget in seconds (fractions allowed)
    #[arg(long = "timeout-s")]
    pub timeout_s: Option<f64>,
    /// Enumerate every answer set instead of stopping at the first
    #[arg(long)]
    pub all: bool,
    /// Write the solution as JSON to this path
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

/// Instance coordinates shared by `gen` and `encode`.
#[derive(Debug, Args)]
pub struct InstanceParams {
    /// Instance size: leaves (wseq), jobs (is), or segments (rf)
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Move count (rf only; ignored elsewhere)
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    /// Generator seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Benchmark domain: wseq | is | rf
    #[arg(long, value_parser = parse_domain)]
    pub domain: Domain,
    #[command(flatten)]
    pub params: InstanceParams,
    /// Write the instance JSON to this path instead of stdout
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Instance JSON file; omit to generate one from --domain/--n/--t/--seed
    pub instance: Option<PathBuf>,
    /// Encoding: pure-asp | true-casp | pure-csp
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Encoding,
    /// Domain to generate when no instance file is given
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<Domain>,
    #[command(flatten)]
    pub params: InstanceParams,
    /// Write the program to this path instead of stdout
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance JSON file
    pub instance: PathBuf,
    /// Solution JSON file (as written by `solve -o`)
    pub solution: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Matrix config JSON; see `matrix::MatrixConfig`
    pub config: PathBuf,
    /// Write the CSV here (totals table then goes to stdout); default:
    /// CSV on stdout, totals table on stderr
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Encode(a) => cmd_encode(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn budget_of(timeout_s: Option<f64>) -> Result<Option<Duration>> {
    match timeout_s {
        None => Ok(None),
        Some(s) if s.is_finite() && s >= 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => bail!("--timeout-s must be a nonnegative number, got {s}"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Print one solution: the answer set (regular atoms), the constraint
/// literals it fixed, and the witness evaluation of the variables.
fn print_solution(p: &Program, sol: &CaspSolution, idx: Option<usize>) {
    let mut regular: Vec<&str> = sol
        .model
        .positive_atoms()
        .iter()
        .filter(|&&a| p.atom_kind(a) == AtomKind::Regular)
        .map(|&a| p.atom_name(a))
        .collect();
    regular.sort_unstable();
    let label = match idx {
        Some(i) => format!("answer set {i}"),
        None => "answer set".to_string(),
    };
    println!("{label}: {{{}}}", regular.join(", "));
    let lits = sol.model.constraint_literals(p);
    if !lits.is_empty() {
        let parts: Vec<String> = lits
            .iter()
            .map(|&(a, v)| {
                if v {
                    p.atom_name(a).to_string()
                } else {
                    format!("not {}", p.atom_name(a))
                }
            })
            .collect();
        println!("constraints: {}", parts.join(", "));
    }
    if !p.decls.is_empty() {
        let parts: Vec<String> =
            sol.witness.named(&p.decls).map(|(n, v)| format!("{n} = {v}")).collect();
        println!("witness: {}", parts.join(", "));
    }
}

fn print_stats(stats: &RunStats) {
    println!("--- stats ---");
    for (name, value) in stats.flat() {
        println!("{name:<20} {value}");
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let src = fs::read_to_string(&a.program)
        .with_context(|| format!("cannot read {}", a.program.display()))?;
    let p = parse_program(&src)
        .map_err(|e| anyhow!("parse error in {}: {e}", a.program.display()))?;
    let cfg = SolveConfig {
        schema: a.schema,
        blocking: a.blocking,
        minimize_core: a.minimize_core,
        budget: budget_of(a.timeout_s)?,
    };

    if a.all {
        let en = enumerate_all(&p, &cfg);
        for (i, sol) in en.solutions.iter().enumerate() {
            print_solution(&p, sol, Some(i + 1));
        }
        let suffix = if en.complete { "" } else { " (incomplete: budget expired)" };
        println!("{} answer set(s){suffix}", en.solutions.len());
        print_stats(&en.stats);
        if let Some(path) = &a.out {
            let files: Vec<SolutionFile> =
                en.solutions.iter().map(|s| solution_file(&p, s)).collect();
            write_json(path, &files)?;
        }
        return Ok(if !en.complete {
            EXIT_TIMEOUT
        } else if en.solutions.is_empty() {
            EXIT_UNSAT
        } else {
            EXIT_SAT
        });
    }

    let (outcome, stats) = solve_with_schema(&p, &cfg);
    match outcome {
        CaspOutcome::Sat(sol) => {
            println!("SAT");
            print_solution(&p, &sol, None);
            print_stats(&stats);
            if let Some(path) = &a.out {
                write_json(path, &solution_file(&p, &sol))?;
            }
            Ok(EXIT_SAT)
        }
        CaspOutcome::Unsat => {
            println!("UNSAT");
            print_stats(&stats);
            if let Some(path) = &a.out {
                write_json(path, &SolutionFile { result: "unsat".into(), ..Default::default() })?;
            }
            Ok(EXIT_UNSAT)
        }
        CaspOutcome::Budget => {
            println!("TIMEOUT");
            print_stats(&stats);
            if let Some(path) = &a.out {
                write_json(
                    path,
                    &SolutionFile { result: "timeout".into(), ..Default::default() },
                )?;
            }
            Ok(EXIT_TIMEOUT)
        }
    }
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let inst = troika::generate(a.domain, a.params.n, a.params.t, a.params.seed)?;
    let mut text = serde_json::to_string_pretty(&inst)?;
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn read_instance(path: &Path) -> Result<Instance> {
    let src = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let inst: Instance = serde_json::from_str(&src)
        .with_context(|| format!("{} is not a valid instance file", path.display()))?;
    inst.validate().map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(inst)
}

fn cmd_encode(a: &EncodeArgs) -> Result<i32> {
    let inst = match (&a.instance, a.domain) {
        (Some(path), maybe_domain) => {
            let inst = read_instance(path)?;
            if let Some(d) = maybe_domain {
                if inst.domain() != d {
                    bail!(
                        "{} holds a {} instance but --domain says {d}",
                        path.display(),
                        inst.domain()
                    );
                }
            }
            inst
        }
        (None, Some(domain)) => troika::generate(domain, a.params.n, a.params.t, a.params.seed)?,
        (None, None) => bail!("give an instance file or --domain to generate one"),
    };
    let program = inst.encode(a.encoding)?;
    emit(a.out.as_deref(), &program.to_text())?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let inst = read_instance(&a.instance)?;
    let src = fs::read_to_string(&a.solution)
        .with_context(|| format!("cannot read {}", a.solution.display()))?;
    let sol: SolutionFile = serde_json::from_str(&src)
        .with_context(|| format!("{} is not a valid solution file", a.solution.display()))?;
    if sol.result != "sat" {
        println!("FAIL: solution file reports `{}`, nothing to verify", sol.result);
        return Ok(EXIT_ERROR);
    }
    match inst.verify(&sol) {
        Ok(()) => {
            println!("PASS");
            Ok(0)
        }
        Err(msg) => {
            println!("FAIL: {msg}");
            Ok(EXIT_ERROR)
        }
    }
}

fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let src = fs::read_to_string(&a.config)
        .with_context(|| format!("cannot read {}", a.config.display()))?;
    let cfg: matrix::MatrixConfig = serde_json::from_str(&src)
        .with_context(|| format!("{} is not a valid matrix config", a.config.display()))?;
    let report = matrix::run_matrix(&cfg)?;

    let csv = report.csv();
    match &a.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
            println!("{}", report.totals_table());
            println!("{}", report.summary());
        }
        None => {
            print!("{csv}");
            eprintln!("{}", report.totals_table());
            eprintln!("{}", report.summary());
        }
    }

    let mut audit_failed = false;
    for d in report.disagreements() {
        eprintln!("agreement audit: {d}");
        audit_failed = true;
    }
    for v in report.verify_failures() {
        eprintln!("verification audit: {v}");
        audit_failed = true;
    }
    Ok(if audit_failed { EXIT_AUDIT } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_contract_is_internally_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn solve_defaults_are_clear_schema_theory_blocking() {
        let cli = Cli::try_parse_from(["troika", "solve", "p.lp"]).unwrap();
        let Command::Solve(a) = cli.command else { panic!("expected solve") };
        assert_eq!(a.schema, Schema::Clear);
        assert_eq!(a.blocking, BlockingMode::Theory);
        assert!(!a.minimize_core && !a.all);
        assert_eq!(a.timeout_s, None);
        assert_eq!(a.out, None);
    }

    #[test]
    fn solve_flags_all_parse() {
        let cli = Cli::try_parse_from([
            "troika",
            "solve",
            "p.lp",
            "--schema",
            "grey",
            "--blocking",
            "model",
            "--minimize-core",
            "--timeout-s",
            "2.5",
            "--all",
            "-o",
            "x.json",
        ])
        .unwrap();
        let Command::Solve(a) = cli.command else { panic!("expected solve") };
        assert_eq!(a.schema, Schema::Grey);
        assert_eq!(a.blocking, BlockingMode::Model);
        assert!(a.minimize_core && a.all);
        assert_eq!(a.timeout_s, Some(2.5));
        assert_eq!(a.out.as_deref(), Some(Path::new("x.json")));
    }

    #[test]
    fn unknown_axis_values_are_parse_errors() {
        assert!(Cli::try_parse_from(["troika", "solve", "p.lp", "--schema", "white"]).is_err());
        assert!(Cli::try_parse_from(["troika", "gen", "--domain", "chess"]).is_err());
        assert!(Cli::try_parse_from(["troika", "encode", "--encoding", "sat"]).is_err());
    }

    #[test]
    fn budgets_reject_negative_and_non_finite_values() {
        assert_eq!(budget_of(None).unwrap(), None);
        assert_eq!(budget_of(Some(0.0)).unwrap(), Some(Duration::ZERO));
        assert_eq!(budget_of(Some(1.5)).unwrap(), Some(Duration::from_millis(1500)));
        assert!(budget_of(Some(-1.0)).is_err());
        assert!(budget_of(Some(f64::NAN)).is_err());
        assert!(budget_of(Some(f64::INFINITY)).is_err());
    }
}
