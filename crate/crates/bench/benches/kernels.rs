use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use yil_bench::{flow_ellipse, unit_disk};
use yil_core::energy::{energy_boundary, energy_boundary_anisotropic};
use yil_core::flow::flow_run;
use yil_core::physics::exact_interface_kernel;
use yil_core::raster::{rasterize, self_interaction};
use yil_core::{MonolayerParams, ScreeningParams};

fn boundary_energy(c: &mut Criterion) {
    let mut g = c.benchmark_group("energy_boundary");
    let p = ScreeningParams::new(4.0, 1.0).unwrap();
    for n in [32, 64, 128] {
        let sys = unit_disk(n);
        g.bench_with_input(BenchmarkId::new("isotropic", n), &sys, |b, s| {
            b.iter(|| energy_boundary(black_box(s), &p, 1e-8).unwrap())
        });
    }
    let sys = unit_disk(64);
    g.bench_function("anisotropic/64", |b| b.iter(|| energy_boundary_anisotropic(black_box(&sys), &p, 1e-8).unwrap()));
    g.finish();
}

fn raster_pairs(c: &mut Criterion) {
    let sys = unit_disk(128);
    let mut g = c.benchmark_group("self_interaction");
    for h in [0.02, 0.01] {
        let reg = rasterize(&sys, h).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(h), &reg, |b, r| {
            b.iter(|| self_interaction(black_box(r), 2.0, 1.0).unwrap())
        });
    }
    g.finish();
}

fn interface_kernel(c: &mut Criterion) {
    let p = MonolayerParams::reduced(80.0, 1.0).unwrap();
    let mut g = c.benchmark_group("exact_interface_kernel");
    for r in [0.1, 3.0, 100.0] {
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            b.iter(|| exact_interface_kernel(black_box(r), &p).unwrap())
        });
    }
    g.finish();
}

fn flow_steps(c: &mut Criterion) {
    let init = flow_ellipse(32);
    let p = ScreeningParams::from_sigma(16.0, 1.0).unwrap();
    c.bench_function("flow/10_steps_n32", |b| b.iter(|| flow_run(black_box(&init), &p, 10, 0.1).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = boundary_energy, raster_pairs, interface_kernel, flow_steps
}
criterion_main!(benches);
