use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phaselab::concentration::{mc_concentration_with, ConcentrationQuery};
use phaselab::covering::{minkowski_dim_estimate_with, PointCloud};
use phaselab::decoders::{sparse_decode, SparseDecodeOptions};
use phaselab::experiments::{run_phase_transition_with, ExperimentConfig};
use phaselab::measurement::{phaseless_measure, sample_matrix, Ensemble};
use phaselab::rng::derive_seed;
use phaselab::sources::{sample_source, Continuous, SourceSpec};
use phaselab::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn concentration(c: &mut Criterion) {
    let q = ConcentrationQuery::new(vec![1.0, 0.3, -0.5], vec![0.2, 1.0, 0.4], 1.0, 0.05).unwrap();
    let mut group = c.benchmark_group("mc_concentration");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| mc_concentration_with(black_box(&q), 200_000, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn sparse(c: &mut Criterion) {
    let (m, n) = (6, 14);
    let mat = sample_matrix(Ensemble::IidGaussian, m, n, 2).unwrap();
    let spec = SourceSpec::SparseExact {
        s: 2,
        magnitude: Continuous::StandardNormal,
    };
    let x = sample_source(&spec, n, 3).unwrap().x;
    let obs = phaseless_measure(&mat, &x).unwrap();
    let mut group = c.benchmark_group("sparse_decode");
    for (name, exec) in MODES {
        let opts = SparseDecodeOptions {
            exec,
            ..SparseDecodeOptions::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| sparse_decode(&mat, black_box(&obs), 3, obs.match_tol, &opts).unwrap())
        });
    }
    group.finish();
}

fn covering(c: &mut Criterion) {
    let spec = SourceSpec::mixed(1.0, Continuous::Uniform);
    let mut group = c.benchmark_group("covering");
    for points in [2_000u64, 8_000] {
        let pts: Vec<Vec<f64>> = (0..points)
            .map(|i| sample_source(&spec, 3, derive_seed(4, &[i])).unwrap().x)
            .collect();
        let cloud = PointCloud::new(&pts).unwrap();
        let schedule = [0.4, 0.2, 0.1, 0.05];
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, points), &cloud, |b, cloud| {
                b.iter(|| minkowski_dim_estimate_with(cloud, &schedule, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "phase-transition", "n": 10, "rates": ["0.2", "0.4", "0.6"],
            "source": {"kind": "mixed-discrete-continuous", "lambda": 0.3}, "trials": 50, "master_seed": 5}"#,
    )
    .unwrap();
    let mut group = c.benchmark_group("phase_transition");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| run_phase_transition_with(black_box(&cfg), exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, concentration, sparse, covering, sweep);
criterion_main!(benches);
