use std::hint::black_box;

use citecrf_bench::{corpus, model, raw_strings};
use citecrf_core::crf::{nll_and_gradient, prepare_instances, predict_all};
use citecrf_core::features::extract_sequence;
use citecrf_core::synthgen::{builtin_styles, generate_corpus, random_records, GenerateOptions};
use citecrf_core::{tokenize, FeatureConfig, TokenizerConfig};
use criterion::{criterion_group, criterion_main, Criterion, Throughput};

fn front_end(c: &mut Criterion) {
    let refs = corpus(500, 1);
    let raws = raw_strings(&refs);
    let cfg = TokenizerConfig::default();
    let fc = FeatureConfig::default();
    let mut g = c.benchmark_group("front_end");
    g.throughput(Throughput::Elements(raws.len() as u64));
    g.bench_function("tokenize", |b| {
        b.iter(|| raws.iter().map(|r| tokenize(black_box(r), &cfg).len()).sum::<usize>())
    });
    g.bench_function("extract_features", |b| {
        b.iter(|| {
            refs.instances()
                .iter()
                .map(|r| extract_sequence(black_box(r.tokens()), &fc).len())
                .sum::<usize>()
        })
    });
    g.finish();
}

fn inference(c: &mut Criterion) {
    let m = model(300, 2);
    let eval = corpus(500, 3);
    let mut g = c.benchmark_group("inference");
    g.throughput(Throughput::Elements(eval.len() as u64));
    g.bench_function("viterbi_500", |b| b.iter(|| predict_all(&m, black_box(eval.instances())).unwrap()));
    g.finish();
}

fn objective(c: &mut Criterion) {
    let m = model(300, 4);
    let batch = prepare_instances(&m, corpus(1000, 5).instances()).unwrap();
    let mut g = c.benchmark_group("training");
    g.sample_size(20);
    g.throughput(Throughput::Elements(batch.len() as u64));
    g.bench_function("nll_and_gradient_1000", |b| b.iter(|| nll_and_gradient(&m, black_box(&batch), 1.0).unwrap()));
    g.finish();
}

fn synthesis(c: &mut Criterion) {
    let records = random_records(500, 6);
    let styles = builtin_styles();
    let opts = GenerateOptions::default();
    let mut g = c.benchmark_group("synthesis");
    g.throughput(Throughput::Elements(1000));
    g.bench_function("generate_1000", |b| {
        b.iter(|| generate_corpus(black_box(&records), &styles, 1000, 7, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, front_end, inference, objective, synthesis);
criterion_main!(benches);
