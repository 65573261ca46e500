use adaptmt::bpe;
use adaptmt::fda::{self, FdaConfig};
use adaptmt_bench::zipf_corpus;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn fda_select(c: &mut Criterion) {
    let seed = zipf_corpus(1_000, 20_000, 1);
    let mut group = c.benchmark_group("fda_select");
    group.sample_size(10);
    for pool_size in [10_000, 100_000] {
        let pool = zipf_corpus(pool_size, 20_000, 2);
        let config = FdaConfig {
            selection_size: pool_size / 20,
            ..FdaConfig::default()
        };
        let profile = fda::build_seed_profile(&seed, &config).unwrap();
        group.throughput(Throughput::Elements(pool_size as u64));
        group.bench_with_input(BenchmarkId::from_parameter(pool_size), &pool, |b, pool| {
            b.iter(|| fda::select(pool, &profile, &config).unwrap())
        });
    }
    group.finish();
}

fn bpe_apply(c: &mut Criterion) {
    let train = zipf_corpus(20_000, 5_000, 3);
    let model = bpe::learn_bpe(&train, 2_000).unwrap();
    let text = zipf_corpus(10_000, 8_000, 4);
    let mut group = c.benchmark_group("bpe");
    group.sample_size(10);
    group.throughput(Throughput::Elements(text.len() as u64));
    group.bench_function("apply_10k", |b| b.iter(|| bpe::apply_bpe_corpus(&text, &model)));
    group.bench_function("learn_2k_merges", |b| {
        b.iter(|| bpe::learn_bpe(&train, 2_000).unwrap())
    });
    group.finish();
}

criterion_group!(benches, fda_select, bpe_apply);
criterion_main!(benches);
