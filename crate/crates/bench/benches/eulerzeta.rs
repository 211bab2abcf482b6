use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use eulerzeta_bench::points;
use eulerzeta_core::products::product_log_stream_continued;
use eulerzeta_core::{weight_vector, zeta, zeta_neg_int, Modulus};

fn bench_zeta(c: &mut Criterion) {
    let mut group = c.benchmark_group("zeta");
    for (name, s) in points() {
        group.bench_with_input(BenchmarkId::new("tol 1e-10", name), &s, |b, &s| b.iter(|| zeta(black_box(s), 1e-10)));
    }
    group.finish();
}

fn bench_weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("weight_vector");
    for (m, k) in [(2, 8), (3, 8), (6, 12)] {
        let m = Modulus::new(m).unwrap();
        // cached after the first call; this measures the lookup
        group.bench_function(format!("c={m} k={k}"), |b| b.iter(|| weight_vector(black_box(m), black_box(k))));
    }
    group.finish();
}

fn bench_exact(c: &mut Criterion) {
    c.bench_function("zeta_neg_int m=20 c=3", |b| b.iter(|| zeta_neg_int(black_box(20), Modulus::THREE)));
}

fn bench_products(c: &mut Criterion) {
    let mut group = c.benchmark_group("products");
    group.sample_size(10);
    group.bench_function("wallis N=1e4", |b| {
        b.iter(|| product_log_stream_continued(Modulus::TWO, black_box(0.0), 10_000))
    });
    group.finish();
}

criterion_group!(benches, bench_zeta, bench_weights, bench_exact, bench_products);
criterion_main!(benches);
