use criterion::{black_box, criterion_group, criterion_main, Criterion};
use fairworld::audit::{audit_assumptions, AuditOptions, FalsifyOptions};
use fairworld::oracle::exchange_oracle;
use fairworld::rational::ratio;
use fairworld::{
    pareto_maximal_oracle_with, phd_example, scheme_decision, OracleLimits, Scope, TiePolicy, WeightScheme, World,
};
use fairworld_bench::grid_fixture;

fn scheme_decisions(c: &mut Criterion) {
    let (grid, scheme) = grid_fixture(32);
    c.bench_function("scheme_decision grid32", |b| {
        b.iter(|| scheme_decision(black_box(&grid), &scheme, World::Fair, &Scope::All, TiePolicy::Uniform).unwrap())
    });
}

fn oracles(c: &mut Criterion) {
    let (grid, _) = grid_fixture(3);
    let scheme = WeightScheme::single_tier(vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap();
    let d = scheme_decision(&grid, &scheme, World::Fair, &Scope::All, TiePolicy::LowestIndex).unwrap();
    c.bench_function("lp oracle grid3", |b| {
        b.iter(|| {
            pareto_maximal_oracle_with(black_box(&d), &grid, World::Fair, &Scope::All, OracleLimits::unlimited()).unwrap()
        })
    });
    let (big, tiered) = grid_fixture(32);
    let d = scheme_decision(&big, &tiered, World::Fair, &Scope::All, TiePolicy::Uniform).unwrap();
    c.bench_function("exchange oracle grid32", |b| {
        b.iter(|| exchange_oracle(black_box(&d), &big, World::Fair, &Scope::All).unwrap())
    });
}

fn audits(c: &mut Criterion) {
    let phd = phd_example().instance;
    c.bench_function("audit phd", |b| b.iter(|| audit_assumptions(black_box(&phd), AuditOptions::default())));
    let options = AuditOptions {
        falsify: Some(FalsifyOptions { trials: 200, seed: 0 }),
        ..AuditOptions::default()
    };
    c.bench_function("audit phd with falsify", |b| b.iter(|| audit_assumptions(black_box(&phd), options)));
}

criterion_group!(benches, scheme_decisions, oracles, audits);
criterion_main!(benches);
