use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use std::hint::black_box;

use ipwvar::{
    OutcomeModel, PopulationSpec, SimConfig, StratumSpec, WeightingScheme, run_monte_carlo,
};

fn twin_population(p: f64) -> PopulationSpec {
    PopulationSpec::new(vec![
        StratumSpec::new("a", p, 0.0, 0.0, 4.0, 16.0, 17),
        StratumSpec::new("b", p, 0.0, 0.0, 4.0, 16.0, 17),
    ])
}

fn bench_replication_engine(c: &mut Criterion) {
    let schemes = [
        WeightingScheme::TruePropensity,
        WeightingScheme::EstimatedPropensity,
        WeightingScheme::HybridCollapsed,
    ];
    let pop = twin_population(0.3);

    let mut group = c.benchmark_group("run_monte_carlo");
    group.sample_size(20);
    for reps in [10_000u64, 100_000] {
        for model in [OutcomeModel::Gaussian, OutcomeModel::TwoPoint] {
            let config = SimConfig::new(reps, 42).with_outcome_model(model);
            group.bench_with_input(
                BenchmarkId::new(format!("{model:?}"), reps),
                &config,
                |b, config| {
                    b.iter(|| run_monte_carlo(black_box(&pop), &schemes, config).unwrap())
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_replication_engine);
criterion_main!(benches);
