use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use pbs::wars::{estimate_staleness, TrialBatch};
use pbs::{Execution, QuorumSpec, RunPlan, WarsModel};

const TRIALS: u64 = 200_000;

fn staleness(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_staleness");
    group.throughput(Throughput::Elements(TRIALS));
    group.sample_size(20);
    for preset in ["lnkd-disk", "wan"] {
        let model = WarsModel::from_preset(preset, QuorumSpec::new(3, 1, 1).unwrap()).unwrap();
        for execution in [Execution::Sequential, Execution::Parallel] {
            let plan = RunPlan::new(TRIALS, 1).with_execution(execution);
            group.bench_with_input(BenchmarkId::new(format!("{execution:?}"), preset), &plan, |b, plan| {
                b.iter(|| estimate_staleness(&model, black_box(0.0), plan).unwrap())
            });
        }
    }
    group.finish();
}

// Batches also sort horizons and keep latencies, so the merge step weighs more.
fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial_batch");
    group.throughput(Throughput::Elements(TRIALS));
    group.sample_size(20);
    let model = WarsModel::from_preset("ymmr", QuorumSpec::new(5, 2, 1).unwrap()).unwrap();
    for execution in [Execution::Sequential, Execution::Parallel] {
        let plan = RunPlan::new(TRIALS, 1).with_execution(execution);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{execution:?}")), &plan, |b, plan| {
            b.iter(|| TrialBatch::simulate(&model, plan).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, staleness, batch);
criterion_main!(benches);
