use apery_core::apery::{run_cases, RateLaw, Registry, RunOptions};
use apery_core::lfunc::{abel_class_sums, AbelConfig, CoeffStream};
use apery_core::par::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn abel(c: &mut Criterion) {
    let stream = CoeffStream::eta2_cubed_eta6_cubed();
    // Materialize once so the timing covers only the damped sums.
    stream.prefix(AbelConfig::default().max_terms()).unwrap();
    let mut g = c.benchmark_group("abel_class_sums_mod12");
    g.sample_size(10);
    for (name, exec) in EXECS {
        let cfg = AbelConfig { exec, ..AbelConfig::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| abel_class_sums(&stream, 12, 2, cfg).unwrap())
        });
    }
    g.finish();
}

fn cases(c: &mut Criterion) {
    let reg = Registry::builtin().unwrap();
    let geometric: Vec<_> =
        reg.cases().iter().filter(|c| matches!(c.expected_rate, RateLaw::Geometric { .. })).cloned().collect();
    let opts = RunOptions { series_order: 100, ..RunOptions::default() };
    let mut g = c.benchmark_group("run_geometric_cases");
    g.sample_size(10);
    for (name, exec) in EXECS {
        g.bench_function(name, |b| b.iter(|| run_cases(exec, &geometric, &opts)));
    }
    g.finish();
}

criterion_group!(benches, abel, cases);
criterion_main!(benches);
