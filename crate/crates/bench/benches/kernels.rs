//! Microbenchmarks for the numerical kernels at the scale of the default
//! benchmark cube: 32x32x32 samples matricized to 1024x32, with a 64-atom
//! spatial and an 8-atom spectral dictionary.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hsdenoise_bench::core::{
    corrupt, init_state, iterate, matricize, median_filter_band, soft_threshold, solve_coeffs,
    synth_cube, BilinearMap, KbcsParams, LsqConfig, NoiseKind, NoiseSpec,
};

fn noisy_observation() -> Array2<f64> {
    let (cube, _) = synth_cube(32, 32, 32, 12, 4, 0.25, 42).expect("synthesizing the cube");
    let clean = matricize(&cube);
    let spec = NoiseSpec {
        fraction: 0.3,
        kind: NoiseKind::RandomValued,
        seed: 1,
    };
    let (noisy, _) = corrupt(&clean, &spec).expect("corrupting the cube");
    noisy.into_entries()
}

fn kernels(c: &mut Criterion) {
    let y = noisy_observation();
    let params = KbcsParams {
        mu: 50.0,
        mu1: 50.0,
        ..KbcsParams::default()
    };
    let state = init_state(&y, 64, 8, &params).expect("initializing the solver state");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let coeffs = Array2::from_shape_fn((64, 8), |_| rng.random::<f64>() * 2.0 - 1.0);

    c.bench_function("soft threshold, 1024x32", |b| {
        b.iter(|| soft_threshold(black_box(&y), 0.01).expect("thresholding"))
    });

    c.bench_function("two-sided synthesis, 1024x64 * 64x8 * 8x32", |b| {
        let map = BilinearMap::new(&state.spatial_dict, &state.spectral_dict);
        b.iter(|| map.forward(black_box(&coeffs)))
    });

    c.bench_function("coefficient solve, 1024x32 with 64x8 atoms", |b| {
        b.iter(|| {
            solve_coeffs(
                black_box(&y),
                &state.spatial_dict,
                &state.spectral_dict,
                &state.residual_proxy,
                &state.residual_relax,
                &state.coeff_proxy,
                &state.coeff_relax,
                50.0,
                50.0,
                &LsqConfig::default(),
            )
            .expect("coefficient solve")
        })
    });

    let band = Array2::from_shape_fn((64, 64), |_| rng.random::<f64>());
    c.bench_function("median filter, 64x64 window 5", |b| {
        b.iter(|| median_filter_band(black_box(&band), 5).expect("median filter"))
    });

    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("full sweep, 32x32x32 cube with 64x8 atoms", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| {
                iterate(&mut s, &y, &params).expect("sweep");
                s
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
