use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use daas_core::model::grid_point;
use daas_core::{
    daas_sample, rejection_sample, seeded_rng, ula_refine, AliasTable, DaasSampler, EvalCounter,
    FbmModel, KernelSpec, LangevinConfig, SampleBatch,
};

fn pdf_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("pdf_grid");
    for n in [10usize, 100] {
        let model = FbmModel::random(n, &mut seeded_rng(1));
        let k = 8 * n;
        group.bench_with_input(BenchmarkId::new("fft", n), &k, |b, &k| {
            b.iter(|| model.pdf_grid(black_box(k), &mut EvalCounter::new()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pointwise", n), &k, |b, &k| {
            b.iter(|| {
                (0..k)
                    .map(|i| model.density(grid_point(i, black_box(k))))
                    .collect::<Vec<_>>()
            })
        });
    }
    group.finish();
}

fn alias_draws(c: &mut Criterion) {
    let model = FbmModel::random(50, &mut seeded_rng(2));
    let sampler =
        DaasSampler::new(&model, 400, KernelSpec::TRIANGLE, &mut EvalCounter::new()).unwrap();
    let table = AliasTable::new(sampler.pmf());
    let mut rng = seeded_rng(3);
    let mut group = c.benchmark_group("alias");
    group.throughput(Throughput::Elements(1));
    group.bench_function("sample", |b| b.iter(|| table.sample(&mut rng)));
    group.bench_function("build", |b| b.iter(|| AliasTable::new(black_box(sampler.pmf()))));
    group.finish();
}

fn samplers(c: &mut Criterion) {
    let model = FbmModel::random(20, &mut seeded_rng(4));
    let count = 100_000;
    let mut group = c.benchmark_group("draw_100k");
    group.sample_size(10);
    group.throughput(Throughput::Elements(count as u64));
    for kernel in [KernelSpec::UNIFORM, KernelSpec::TRIANGLE, KernelSpec::QUADRATIC] {
        group.bench_function(BenchmarkId::new("daas", kernel.degree()), |b| {
            let mut rng = seeded_rng(5);
            b.iter(|| daas_sample(&model, 80, kernel, count, &mut rng, &mut EvalCounter::new()))
        });
    }
    group.bench_function("rejection", |b| {
        let mut rng = seeded_rng(6);
        b.iter(|| rejection_sample(&model, count, &mut rng, &mut EvalCounter::new()))
    });
    group.finish();
}

fn langevin_step(c: &mut Criterion) {
    let model = FbmModel::random(20, &mut seeded_rng(7));
    let mut rng = seeded_rng(8);
    let start: SampleBatch =
        daas_sample(&model, 80, KernelSpec::TRIANGLE, 10_000, &mut rng, &mut EvalCounter::new())
            .unwrap();
    let config = LangevinConfig::ula(1);
    let mut group = c.benchmark_group("langevin");
    group.throughput(Throughput::Elements(start.len() as u64));
    group.bench_function("ula_step_10k", |b| {
        b.iter(|| ula_refine(&model, &start, &config, &mut rng, &mut EvalCounter::new()))
    });
    group.bench_function("score", |b| {
        b.iter(|| model.score(black_box(0.3), &mut EvalCounter::new()))
    });
    group.finish();
}

criterion_group!(benches, pdf_grid, alias_draws, samplers, langevin_step);
criterion_main!(benches);
