use std::hint::black_box;

use binsamp::dnf::{brute_force_count, random_dnf};
use binsamp::exact::parse_decimal;
use binsamp::par::map_chunks_sequential;
use binsamp::rng::StreamRng;
use binsamp::sampler::{BinomialSampler, PrecisionPolicy};
use binsamp::specfun::LanczosParams;
use criterion::{criterion_group, criterion_main, Criterion};
use num_bigint::BigUint;

const DRAWS: u64 = 8192;
const CHUNK: u64 = 1024;

fn draws(c: &mut Criterion) {
    let p = parse_decimal("0.3").unwrap();
    let s = BinomialSampler::new(BigUint::from(100u32), &p, 1e-9, &PrecisionPolicy::Auto, &LanczosParams::default_set())
        .unwrap();
    let root = StreamRng::seed_from_u64(1);
    let work = |r: std::ops::Range<u64>| {
        let mut rng = root.split(r.start / CHUNK);
        r.map(|_| s.sample(&mut rng).unwrap().iterations).sum::<u64>()
    };
    let mut g = c.benchmark_group("binomial_n100_p0.3");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| black_box(map_chunks_sequential(DRAWS, CHUNK, work))));
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| b.iter(|| black_box(binsamp::par::map_chunks_parallel(DRAWS, CHUNK, work))));
    g.finish();
}

fn dnf_enumeration(c: &mut Criterion) {
    let f = random_dnf(&mut StreamRng::seed_from_u64(2), 20, 30, 3..=8);
    let mut g = c.benchmark_group("brute_force_20_vars");
    g.sample_size(10);
    g.bench_function("count", |b| b.iter(|| black_box(brute_force_count(&f).unwrap())));
    g.finish();
}

criterion_group!(benches, draws, dnf_enumeration);
criterion_main!(benches);
