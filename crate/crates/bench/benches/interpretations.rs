use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpcq_bench::{delivery, random_suite, Fixture};
use lpcq_core::lpcore::SolverOptions;
use lpcq_core::pipeline::{interpret, prepare, run, Mode};

const MODES: [Mode; 3] = [Mode::Natural, Mode::Replacement, Mode::Factorized];

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    for m in [100, 300] {
        let f = delivery(m, 1);
        let cp = prepare(&f.program, &f.db).expect("closes");
        for mode in [Mode::Natural, Mode::Factorized] {
            g.bench_with_input(BenchmarkId::new(mode.to_string(), m), &cp, |b, cp| {
                b.iter(|| interpret(cp, &f.db, mode, &f.trees).expect("interprets"))
            });
        }
    }
    g.finish();
}

fn end_to_end(c: &mut Criterion) {
    let mut g = c.benchmark_group("delivery");
    g.sample_size(10);
    for m in [100, 300] {
        let f = delivery(m, 1);
        for mode in [Mode::Natural, Mode::Factorized] {
            g.bench_with_input(BenchmarkId::new(mode.to_string(), m), &f, |b, f: &Fixture| {
                b.iter(|| run(&f.program, &f.db, mode, &f.trees, &SolverOptions::default()).expect("runs"))
            });
        }
    }
    g.finish();
}

fn random_programs(c: &mut Criterion) {
    let suite = random_suite(50, 1);
    let mut g = c.benchmark_group("random_suite");
    for mode in MODES {
        g.bench_function(mode.to_string(), |b| {
            b.iter(|| {
                for f in &suite {
                    run(&f.program, &f.db, mode, &f.trees, &SolverOptions::default()).expect("runs");
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, build, end_to_end, random_programs);
criterion_main!(benches);
