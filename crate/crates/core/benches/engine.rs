use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use jdd::bounds::DensitySample;
use jdd::channel::{ChannelParams, FramePlan};
use jdd::codebook::Codebook;
use jdd::detectors::{Detector, DetectorKind};
use jdd::montecarlo::{calibrate_detector, estimate_rates, CalibrationConfig, RateConfig};
use jdd::par::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn calibration(c: &mut Criterion) {
    let params = ChannelParams::from_snr_db(-3.0, 84).unwrap();
    let plan = FramePlan::new(24, 60);
    let det = Detector::new(DetectorKind::HypedExact { prior: 0.5 }, &plan, &params, None).unwrap();

    let mut group = c.benchmark_group("calibrate_hyped_n84");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = CalibrationConfig {
            trials: 50_000,
            eval_trials: 50_000,
            seed: 1,
            exec,
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| calibrate_detector(black_box(&det), 1e-3, &cfg).unwrap())
        });
    }
    group.finish();
}

fn dad_rates(c: &mut Criterion) {
    let cb = Codebook::reed_muller_1(5).unwrap();
    let params = ChannelParams::from_snr_db(-3.0, 40).unwrap();
    let plan = FramePlan::new(8, 32);
    let det = Detector::new(DetectorKind::Dad, &plan, &params, Some(&cb)).unwrap();

    let mut group = c.benchmark_group("rates_dad_rm1_5");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = RateConfig {
            idle_trials: 10_000,
            active_trials: 10_000,
            seed: 2,
            exec,
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate_rates(black_box(&det), 20.0, &cfg).unwrap())
        });
    }
    group.finish();
}

fn density(c: &mut Criterion) {
    let mut group = c.benchmark_group("density_sample_n64");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| DensitySample::draw(64, 1.0, 100_000, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, calibration, dad_rates, density);
criterion_main!(benches);
