use std::hint::black_box;

use autocharge_core::magnetics::{calibrate_field, CalibrationTargets, MagnetSpec};
use autocharge_core::scenario::preset;
use autocharge_core::Simulation;
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn bench_step(c: &mut Criterion) {
    for name in ["sd2s_def_circle", "sd2s_ceral_circle"] {
        let scenario = preset(name).unwrap().resolve().unwrap();
        c.bench_function(&format!("step_1s/{name}"), |b| {
            b.iter_batched(
                || Simulation::new(scenario.clone()).unwrap(),
                |mut sim| {
                    for _ in 0..1000 {
                        sim.step().unwrap();
                    }
                    sim
                },
                BatchSize::SmallInput,
            )
        });
    }
}

fn bench_calibration(c: &mut Criterion) {
    let targets = CalibrationTargets::default();
    let specs = MagnetSpec::catalog();
    c.bench_function("calibrate_field", |b| {
        b.iter(|| calibrate_field(black_box(&specs), black_box(&targets)).unwrap())
    });
}

criterion_group!(benches, bench_step, bench_calibration);
criterion_main!(benches);
