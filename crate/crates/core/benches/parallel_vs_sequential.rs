// Rayon data-parallel paths against the same code forced onto one thread.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qtsim_core::foundation::{FourMomentum, FourVector};
use qtsim_core::grid::{GridAxis, GridWaveFunction};
use qtsim_core::kernels::electric_kernel;
use qtsim_core::par;
use qtsim_core::pathint::{propagate_sliced, DiscreteLagrangian, SliceConfig};
use qtsim_core::schrodinger::{evolve, FieldConfig};
use qtsim_core::wavepackets::GaussianTestFunction;

fn packet() -> GaussianTestFunction {
    GaussianTestFunction::new(FourVector::ZERO, FourMomentum::new(1.0, 0.2, 0.0, 0.0), [1.0; 4]).unwrap()
}

fn grid() -> GridWaveFunction {
    let axes = vec![GridAxis::new(0, -9.0, 10.0, 191).unwrap(), GridAxis::new(1, -8.0, 8.0, 161).unwrap()];
    packet().sample(axes).unwrap()
}

fn both<F: Fn()>(c: &mut Criterion, group: &str, work: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::from_parameter("parallel"), |b| b.iter(&work));
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| b.iter(|| par::sequential(&work)));
    g.finish();
}

fn bench_evolve(c: &mut Criterion) {
    let g0 = grid();
    let field = FieldConfig::free(1.0).with_scalar(1.0, |p: FourVector| 0.05 * p.x);
    both(c, "evolve_1p1", || {
        black_box(evolve(black_box(&g0), &field, 0.5, 10).unwrap());
    });
}

fn bench_pathint(c: &mut Criterion) {
    let psi = packet();
    let cfg = SliceConfig::ladder(32, 1.0, &psi, 1.0, &[0]).unwrap();
    let lag = DiscreteLagrangian::free(1.0);
    both(c, "pathint_32_slices", || {
        black_box(propagate_sliced(black_box(&psi), &cfg, &lag).unwrap());
    });
}

fn bench_kernel_table(c: &mut Criterion) {
    let n = 400;
    both(c, "electric_kernel_table", || {
        let v = par::map_indexed(n * n, |k| {
            let (t, x) = ((k / n) as f64 * 0.01 - 2.0, (k % n) as f64 * 0.01 - 2.0);
            electric_kernel(0.6, 1.0, 1.0, 0.0, 0.0, t, x).unwrap()
        });
        black_box(v);
    });
}

criterion_group!(benches, bench_evolve, bench_pathint, bench_kernel_table);
criterion_main!(benches);
