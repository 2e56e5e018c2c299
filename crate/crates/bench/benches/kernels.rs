use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kgsim::diagnostics::time_spectrum;
use kgsim::integrator::{Boundary, SchemeParams, Stepper};
use kgsim::{manifold_distance, sample_solitary, GridSpec, ModelSpec, OscillatorSpec, SolitaryWave};
use num_complex::Complex64;

fn quartic() -> ModelSpec {
    ModelSpec::oscillators(1.0, vec![OscillatorSpec::new(0.0, vec![0.0, -1.0, 0.25]).unwrap()]).unwrap()
}

fn seeded(grid: &GridSpec, model: &ModelSpec) -> kgsim::FieldState {
    let w = SolitaryWave::all_at(&model.oscillator_list()[0].potential, 0.8, 1.0, 0.0).unwrap().remove(0);
    sample_solitary(&w, grid, 0.0)
}

fn step(c: &mut Criterion) {
    let grid = GridSpec::new(40.0, 0.01).unwrap();
    let model = quartic();
    for bc in [Boundary::Dirichlet, Boundary::Transparent] {
        let scheme = SchemeParams::from_cfl(0.5, &grid, bc);
        let mut st = Stepper::new(seeded(&grid, &model), &model, &grid, scheme).unwrap();
        c.bench_function(&format!("step 8001 nodes {bc:?}"), |b| b.iter(|| st.advance()));
    }
}

fn distance(c: &mut Criterion) {
    let grid = GridSpec::new(40.0, 0.01).unwrap();
    let model = quartic();
    let state = seeded(&grid, &model).scaled(1.01);
    let mut group = c.benchmark_group("manifold");
    group.sample_size(10);
    group.bench_function("manifold_distance 8001 nodes", |b| {
        b.iter(|| manifold_distance(black_box(&state), &model, &grid))
    });
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let dt = 0.005;
    let trace: Vec<Complex64> = (0..40_001)
        .map(|n| {
            let t = n as f64 * dt;
            Complex64::from_polar(1.0, -0.8 * t) + Complex64::from_polar(0.1, 2.4 * t)
        })
        .collect();
    c.bench_function("time_spectrum 20000 samples", |b| {
        b.iter(|| time_spectrum(black_box(&trace), dt, (100.0, 200.0), 1.0).unwrap())
    });
}

criterion_group!(benches, step, distance, spectrum);
criterion_main!(benches);
