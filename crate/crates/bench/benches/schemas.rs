//! Criterion comparison of the three integration schemas on the three
//! benchmark domains. Each group solves one fixed program under
//! black-box, grey-box, and clear-box integration; group names make
//! `critcmp`-style side-by-side reading easy.
//!
//! The pure-ASP group is the control: with no constraint atoms in the
//! encoding, all three schemas degenerate to the same base-solver run
//! and should measure identically.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use troika::{solve_with_schema, Domain, Encoding, Program, Schema};
use troika_bench::{config, encoded, light_switch};

fn bench_program(c: &mut Criterion, group_name: &str, program: &Program) {
    let mut group = c.benchmark_group(group_name);
    group.sample_size(10).measurement_time(Duration::from_secs(3));
    for schema in Schema::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(schema), &schema, |b, &schema| {
            b.iter(|| solve_with_schema(std::hint::black_box(program), &config(schema)));
        });
    }
    group.finish();
}

fn schemas(c: &mut Criterion) {
    bench_program(c, "light_switch", &light_switch());
    bench_program(c, "wseq_n4/true_casp", &encoded(Domain::Wseq, Encoding::TrueCasp, 4, 2, 1));
    bench_program(c, "wseq_n4/pure_csp", &encoded(Domain::Wseq, Encoding::PureCsp, 4, 2, 1));
    bench_program(c, "wseq_n4/pure_asp", &encoded(Domain::Wseq, Encoding::PureAsp, 4, 2, 1));
    bench_program(c, "is_j4/true_casp", &encoded(Domain::Is, Encoding::TrueCasp, 4, 2, 1));
    bench_program(c, "rf_n4_t2/true_casp", &encoded(Domain::Rf, Encoding::TrueCasp, 4, 2, 1));
}

criterion_group!(benches, schemas);
criterion_main!(benches);
