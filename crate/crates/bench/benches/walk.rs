use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prewet_bench::bridge_sampler;
use prewet_core::rng::{domain, StreamKey};

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("bridge_dp");
    g.sample_size(10);
    for n in [256usize, 1024] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| bridge_sampler(n, 0.2)));
    }
    g.finish();
}

fn sample(c: &mut Criterion) {
    let mut g = c.benchmark_group("bridge_sample");
    for n in [256usize, 1024] {
        let s = bridge_sampler(n, 0.2);
        let key = StreamKey::new(3, 0);
        let mut k = 0u64;
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                k += 1;
                s.sample(&mut key.stream(domain::WALK, k))
            })
        });
    }
    g.finish();
}

criterion_group!(benches, build, sample);
criterion_main!(benches);
