use criterion::{criterion_group, criterion_main, Criterion};
use mppdp::alns::AlnsParams;
use mppdp::ensemble::{run_ensemble, EnsembleConfig, Execution};
use mppdp::scenario::{generate_scenario, ScenarioConfig, Spatial, TwRegime};

fn ensemble(c: &mut Criterion) {
    let cfg = ScenarioConfig::new(Spatial::Clustered, TwRegime::Tight, 3, 7).with_requests(8, 8);
    let inst = generate_scenario(&cfg).unwrap().build().unwrap();
    let mut params = AlnsParams::default();
    params.search.lambda = 400;
    params.search.lambda_min = 400;
    let mut group = c.benchmark_group("ensemble_8_runs");
    group.sample_size(10);
    for (name, execution) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        let ec = EnsembleConfig {
            runs: 8,
            jobs: None,
            execution,
        };
        group.bench_function(name, |b| {
            b.iter(|| run_ensemble(&inst, &params, None, ec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
