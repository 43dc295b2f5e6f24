use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixbound::em::{run_restarts, DataMatrix, EmOptions};
use mixbound::harness::{run_experiment, ExperimentConfig, Mode};
use mixbound::par::Execution;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn em_restarts(c: &mut Criterion) {
    let u = DataMatrix::from_rows(&[
        &[31, 4, 15, 9, 26],
        &[5, 35, 8, 9, 7],
        &[9, 3, 23, 8, 4],
        &[6, 2, 6, 43, 3],
        &[3, 8, 32, 7, 50],
    ])
    .unwrap();
    let opts = EmOptions {
        max_iter: 500,
        ..EmOptions::default()
    };
    let mut group = c.benchmark_group("em_restarts_5x5_r3");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_restarts(&u, 3, 1, 64, &opts, exec).unwrap())
        });
    }
    group.finish();
}

fn table1_experiment(c: &mut Criterion) {
    let mut group = c.benchmark_group("table1_4x4_r3");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ExperimentConfig {
            num_matrices: 16,
            num_restarts: 20,
            mode: Mode::table1(),
            exec,
            ..ExperimentConfig::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_experiment(&cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, em_restarts, table1_experiment);
criterion_main!(benches);
