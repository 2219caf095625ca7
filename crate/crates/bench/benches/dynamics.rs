use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use shearflow::dynamics::{sample_ball, GridSpec};
use shearflow::{basin_sample, decompose_field, designated_map, parse_field, trotter_compose, BasinParams, Complex64, StepOptions};

fn trotter(c: &mut Criterion) {
    let v = parse_field("[x2^2 + x1; x1*x2 - 1]").unwrap();
    let prims = decompose_field(&v).unwrap();
    let points = sample_ball(2, 25, 0.5, 1);
    let mut g = c.benchmark_group("trotter_apply");
    for m in [8usize, 32, 128] {
        let seq = trotter_compose(&prims, 0.5, m, StepOptions::default()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(m), &seq, |b, seq| {
            b.iter(|| points.iter().map(|p| seq.apply(black_box(p))).collect::<Vec<_>>())
        });
    }
    g.finish();
}

fn basin(c: &mut Criterion) {
    let map = designated_map();
    let grid = GridSpec::real_plane(2, 2.0, 50, 50);
    let fixed = [Complex64::new(0.0, 0.0); 2];
    let mut g = c.benchmark_group("basin");
    g.sample_size(10);
    g.bench_function("designated_50x50", |b| b.iter(|| basin_sample(&map, &fixed, &grid, &BasinParams::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, trotter, basin);
criterion_main!(benches);
