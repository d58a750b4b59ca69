//! Sequential engine versus the rayon pool on the same instances.
//!
//! Built with `--no-default-features` the pool is compiled out and both
//! variants take the sequential path, which gives a baseline for the
//! scheduling overhead.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hcp_core::benchmarks::{gen_bts, gen_colorball};
use hcp_core::lang;
use hcp_core::{Engine, EngineConfig, Feasibility, FeasibilityView, GroundModel};

const POOL_THREADS: usize = 4;

fn bench_instance(c: &mut Criterion, name: &str, text: &str) {
    let unit = lang::parse(text);
    let model = GroundModel::ground(&unit.domain).unwrap();
    let problem = model.ground_problem(&unit.problem).unwrap();
    let feas = Feasibility::new();
    let view = FeasibilityView::new(&feas, &model);

    let mut group = c.benchmark_group(name);
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (label, threads) in [("sequential", 1), ("parallel", POOL_THREADS)] {
        let config = EngineConfig {
            threads,
            ..EngineConfig::default()
        };
        group.bench_function(BenchmarkId::new(label, threads), |b| {
            b.iter(|| {
                Engine::new(&model, &problem.goal, &view, config)
                    .run(&problem.initial)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn engine(c: &mut Criterion) {
    bench_instance(c, "bts-14", &gen_bts(14).unwrap());
    bench_instance(c, "colorball-3-2", &gen_colorball(3, 2).unwrap());
}

criterion_group!(benches, engine);
criterion_main!(benches);
