use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use htmr_lab::harness::{sweep_monte_carlo, Grid, SweepConfig};
use htmr_lab::network::{build_network, run_trials_seeded, LeafConfig, ReferenceStream};
use htmr_lab::{Executor, Probability, TmrOrder};

fn executors() -> Vec<(&'static str, Executor)> {
    vec![
        ("sequential", Executor::sequential()),
        ("parallel", Executor::parallel(0)),
    ]
}

fn run_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_trials");
    let trials = 1u64 << 18;
    group.throughput(Throughput::Elements(trials));
    for order in [1u32, 2, 3] {
        let net = build_network(
            TmrOrder::new(order).unwrap(),
            LeafConfig::Uniform(Probability::new(0.1).unwrap()),
            Probability::new(0.01).unwrap(),
        )
        .unwrap();
        for (name, exec) in executors() {
            group.bench_with_input(BenchmarkId::new(name, order), &net, |b, net| {
                b.iter(|| run_trials_seeded(net, trials, ReferenceStream::Alternating, 42, &exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_monte_carlo");
    group.sample_size(10);
    let cfg = SweepConfig {
        grid: Grid::default_linear(),
        orders: vec![TmrOrder::FIRST, TmrOrder::SECOND],
        trials: 10_000,
        seed: 7,
        ..SweepConfig::default()
    };
    for (name, exec) in executors() {
        group.bench_function(name, |b| b.iter(|| sweep_monte_carlo(&cfg, &exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, run_trials, sweep);
criterion_main!(benches);
