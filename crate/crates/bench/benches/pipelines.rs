use criterion::{criterion_group, criterion_main, Criterion};
use ndf_core::designs;
use ndf_core::flow::{integrate_flow, random_boundary_polynomial, PolynomialHandle};
use ndf_core::mz::{mz_check, MZOptions};
use ndf_core::optimizer::{extend_design, ExtendOptions};
use ndf_core::partition::equal_area_partition;
use ndf_core::{KernelSpec, Point, SphereDim};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn extend(c: &mut Criterion) {
    let tet = designs::tetrahedron();
    let opts = ExtendOptions::default();
    c.bench_function("extend_tetrahedron_t3_n8", |b| {
        b.iter(|| extend_design(3, SphereDim::TWO, &tet, 8, &opts).unwrap())
    });
}

fn flow(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let p = random_boundary_polynomial(3, SphereDim::TWO, &mut rng).unwrap();
    let starts: Vec<Point> = (0..16)
        .map(|_| Point::random(SphereDim::TWO, &mut rng))
        .collect();
    c.bench_function("flow_t3_16_starts", |b| {
        b.iter(|| integrate_flow(&p, &starts, 1.0, 200).unwrap())
    });
}

fn mz(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r = equal_area_partition(1000).unwrap();
    let p = PolynomialHandle::random(KernelSpec::new(3, SphereDim::TWO).unwrap(), &mut rng);
    let pts = r.sample_points(&mut rng);
    let opts = MZOptions::default();
    let mut g = c.benchmark_group("mz");
    g.sample_size(10);
    g.bench_function("mz_check_m3_n1000", |b| {
        b.iter(|| mz_check(&p, &r, &pts, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, extend, flow, mz);
criterion_main!(benches);
