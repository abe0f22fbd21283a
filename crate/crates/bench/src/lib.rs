//! Shared fixtures for the schema-comparison benchmarks: the running
//! light-switch example plus small generated instances of the three
//! benchmark domains, encoded as ground programs ready to hand to the
//! solver under each integration schema.

use troika::{generate, Domain, Encoding, Program, Schema, SolveConfig};

/// A one-rule-per-concept program with a single constraint variable;
/// the smallest input on which all three schemas do real theory work.
pub const LIGHT_SWITCH: &str = "\
#var x 0..24.
am :- x #< 12.
lighton :- switch, not am.
{switch}.
:- not lighton.
";

pub fn light_switch() -> Program {
    troika::parse_program(LIGHT_SWITCH).expect("fixture parses")
}

/// Generate and encode one benchmark instance. Panics on unsupported
/// (domain, encoding) pairs — fixtures are static, so that is a bug in
/// the benchmark, not an input error.
pub fn encoded(domain: Domain, encoding: Encoding, n: usize, t: usize, seed: u64) -> Program {
    generate(domain, n, t, seed)
        .expect("fixture size is valid")
        .encode(encoding)
        .expect("fixture encoding is supported")
}

/// The solver configuration benchmarked for `schema`: defaults
/// everywhere else, so the runs isolate the integration style itself.
pub fn config(schema: Schema) -> SolveConfig {
    SolveConfig::with_schema(schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use troika::{solve_with_schema, CaspOutcome};

    #[test]
    fn fixtures_solve_under_every_schema() {
        let programs = [
            light_switch(),
            encoded(Domain::Wseq, Encoding::TrueCasp, 4, 2, 1),
            encoded(Domain::Is, Encoding::TrueCasp, 4, 2, 1),
            encoded(Domain::Rf, Encoding::TrueCasp, 4, 2, 1),
        ];
        for p in &programs {
            let mut results = Vec::new();
            for schema in Schema::ALL {
                let (out, _) = solve_with_schema(p, &config(schema));
                results.push(matches!(out, CaspOutcome::Sat(_)));
            }
            assert_eq!(results[0], results[1]);
            assert_eq!(results[1], results[2]);
        }
    }
}
