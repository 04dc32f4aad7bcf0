use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixnl::{build_mesh, solve_eigen, OperatorMatrices, QuadratureOptions, SpectralMeasure};

fn bench_eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_eigen");
    group.sample_size(10);
    let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
    for n_in in [64usize, 128, 256] {
        let mesh = build_mesh((-1.0, 1.0), 8.0, n_in, 32).unwrap();
        let mats =
            OperatorMatrices::assemble(&mesh, &mu, 1.0, &QuadratureOptions::default()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n_in), &n_in, |b, _| {
            b.iter(|| solve_eigen(&mesh, &mats, 8).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_eigen);
criterion_main!(benches);
