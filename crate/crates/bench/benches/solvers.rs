use criterion::{black_box, criterion_group, criterion_main, Criterion};
use netext_core::benchmark::{numeric_optimal_price, optimal_price};
use netext_core::oracle::{simulate_choices, UpdateRule};
use netext_core::stage1::{best_response_5g, best_response_wifi, default_starts};
use netext_core::stage2::{equilibrium_general, equilibrium_uniform};
use netext_core::{nash_equilibrium, MarketParams, SensitivityDistribution, SolverConfig};

fn market(q: f64) -> MarketParams {
    MarketParams::default().with(|r| r.q = q).unwrap()
}

fn tn() -> SensitivityDistribution {
    SensitivityDistribution::truncated_normal(0.5, 1.0).unwrap()
}

fn benchmark_price(c: &mut Criterion) {
    let p = market(60.0);
    let u = SensitivityDistribution::uniform();
    let d = tn();
    c.bench_function("benchmark/closed_form", |b| b.iter(|| optimal_price(black_box(&p), &u)));
    c.bench_function("benchmark/numeric_tn", |b| {
        b.iter(|| numeric_optimal_price(black_box(&p), &d))
    });
}

fn stage2(c: &mut Criterion) {
    let p = market(30.0);
    let u = SensitivityDistribution::uniform();
    let d = tn();
    c.bench_function("stage2/uniform", |b| {
        b.iter(|| equilibrium_uniform(black_box(&p), 1200.0, 300.0).unwrap())
    });
    c.bench_function("stage2/general_uniform", |b| {
        b.iter(|| equilibrium_general(black_box(&p), &u, 1200.0, 300.0).unwrap())
    });
    c.bench_function("stage2/general_tn", |b| {
        b.iter(|| equilibrium_general(black_box(&p), &d, 1200.0, 300.0).unwrap())
    });
}

fn stage1(c: &mut Criterion) {
    let p = market(30.0);
    let u = SensitivityDistribution::uniform();
    let cfg = SolverConfig::for_params(&p);
    let mut g = c.benchmark_group("stage1");
    g.sample_size(10);
    g.bench_function("best_response_5g", |b| {
        b.iter(|| best_response_5g(black_box(&p), &u, 300.0, &cfg).unwrap())
    });
    g.bench_function("best_response_wifi", |b| {
        b.iter(|| best_response_wifi(black_box(&p), &u, 1200.0, &cfg).unwrap())
    });
    let starts = default_starts(&p);
    g.bench_function("nash_uniform_q30", |b| {
        b.iter(|| nash_equilibrium(black_box(&p), &u, &cfg, &starts).unwrap())
    });
    g.finish();
}

fn agents(c: &mut Criterion) {
    let p = market(60.0);
    let u = SensitivityDistribution::uniform();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("agents_1e5", |b| {
        b.iter(|| {
            simulate_choices(
                black_box(&p),
                &u,
                1000.0,
                300.0,
                100_000,
                1,
                UpdateRule::RandomSequential,
            )
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, benchmark_price, stage2, stage1, agents);
criterion_main!(benches);
