use attn_bench::{heavy_tailed_values, q1_gain_samples};
use attn_core::fitting::fit_gain_params;
use attn_core::inequality::{gini, log_bin, lorenz, ValueSample};
use attn_core::model::{follower_trajectory_ode, presets, AttentionState};
use attn_core::sim::{init_population, reference_config, step};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_inequality(c: &mut Criterion) {
    let sample = ValueSample::new(heavy_tailed_values(1, 100_000)).unwrap();
    let mut group = c.benchmark_group("inequality");
    group.bench_function("gini_100k", |b| {
        b.iter(|| gini(black_box(&sample)).unwrap())
    });
    group.bench_function("lorenz_100k", |b| {
        b.iter(|| lorenz(black_box(&sample)).unwrap())
    });
    group.bench_function("log_bin_100k", |b| {
        b.iter(|| log_bin(black_box(&sample), 2.0).unwrap())
    });
    group.finish();
}

fn bench_trajectory(c: &mut Criterion) {
    let params = presets::q1(5600);
    let state = AttentionState {
        f0: 800,
        r: 30.0,
        m: 6.0,
        p: 0.0,
    };
    c.bench_function("rk4_t10_dt_1e-3", |b| {
        b.iter(|| follower_trajectory_ode(black_box(&params), black_box(&state), 10.0, 1e-3))
    });
}

fn bench_fitting(c: &mut Criterion) {
    let samples = q1_gain_samples(2, 2000);
    let mut group = c.benchmark_group("fitting");
    group.sample_size(10);
    group.bench_function("gain_grid_polish_2000", |b| {
        b.iter(|| fit_gain_params(black_box(&samples)).unwrap())
    });
    group.finish();
}

fn bench_simulation(c: &mut Criterion) {
    let cfg = reference_config(3);
    let mut group = c.benchmark_group("simulation");
    group.sample_size(20);
    group.bench_function("step_2000_users", |b| {
        let mut state = init_population(&cfg).unwrap();
        b.iter(|| {
            step(&mut state, &cfg);
            black_box(state.step)
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_inequality,
    bench_trajectory,
    bench_fitting,
    bench_simulation
);
criterion_main!(benches);
