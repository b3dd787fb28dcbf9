use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use rocar::par::{generate_batch_sequential, GenerationRequest};
use rocar::schema::SchemaRegistry;

fn requests(count: u64) -> Vec<GenerationRequest> {
    (0..count).map(|s| (1 + (s % 10) as usize, s)).collect()
}

fn batch_generation(c: &mut Criterion) {
    let reg = SchemaRegistry::shipped();
    let mut group = c.benchmark_group("generate_batch");
    for count in [100u64, 1_000] {
        let reqs = requests(count);
        group.bench_with_input(BenchmarkId::new("sequential", count), &reqs, |b, r| {
            b.iter(|| generate_batch_sequential(&reg, black_box(r)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", count), &reqs, |b, r| {
            b.iter(|| rocar::par::generate_batch_parallel(&reg, black_box(r)))
        });
    }
    group.finish();
}

fn batch_audit(c: &mut Criterion) {
    let reg = SchemaRegistry::shipped();
    let reqs = requests(1_000);
    c.bench_function("audit_batch/1000", |b| {
        b.iter(|| rocar::par::audit_batch(&reg, black_box(&reqs)))
    });
}

criterion_group!(benches, batch_generation, batch_audit);
criterion_main!(benches);
