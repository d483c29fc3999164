//! Sequential versus rayon evaluation of the per-sample checks. Without the
//! `parallel` feature both rows run on one thread.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use finsler_core::catalog::Catalog;
use finsler_core::verify::{verify, Execution, Options};

fn bench(c: &mut Criterion) {
    let cat = Catalog::builtin();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for name in ["funk", "k1-example"] {
        let entry = cat.entry(name).unwrap();
        for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let opts = Options {
                samples: 64,
                seed: 1,
                execution,
                ..Options::default()
            };
            group.bench_with_input(BenchmarkId::new(label, name), &opts, |b, o| {
                b.iter(|| verify(entry, o).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
