use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hilbert_dynamics::geometry::ConvexBody;
use hilbert_dynamics::metrics::MetricInstance;
use hilbert_dynamics::verify::{check_condition_c, CheckContext};

/// Condition (C) sampling on the square, once on a single worker thread and
/// once on the full pool. Both runs produce the same report.
fn condition_c(c: &mut Criterion) {
    let metric = MetricInstance::hilbert(ConvexBody::cube(2).expect("square"));
    let mut ctx = CheckContext::default();
    ctx.params.n_condition_c = 20_000;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group("condition_c_20k");
    group.sample_size(10);
    for (name, n) in [("one-thread", 1), ("pool", threads)] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("pool");
        group.bench_with_input(BenchmarkId::new(name, n), &pool, |b, pool| {
            b.iter(|| pool.install(|| check_condition_c(&ctx, "square", &metric, false)))
        });
    }
    group.finish();
}

criterion_group!(benches, condition_c);
criterion_main!(benches);
