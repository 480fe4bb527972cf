//! Benchmarks of the three pipeline phases: quotient
//! construction, the absolute check, and the almost-sure check on the
//! 96-location experiment models.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ppcd_benches::experiment_model;

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for experiment in [1u8, 2] {
        let model = experiment_model(experiment);
        let quotient = model.build_quotient().expect("experiment models build");
        group.bench_with_input(
            BenchmarkId::new("quotient_build", experiment),
            &model,
            |b, m| b.iter(|| m.build_quotient().unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("check_absolute", experiment),
            &quotient.chain,
            |b, chain| b.iter(|| chain.check_absolute()),
        );
        group.bench_with_input(
            BenchmarkId::new("check_almost_sure", experiment),
            &quotient.chain,
            |b, chain| b.iter(|| chain.check_almost_sure().unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
