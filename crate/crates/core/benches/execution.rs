use std::collections::HashMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hintedbt::corpus_io::{EmbeddingVector, Origin, SentencePair};
use hintedbt::eval::bootstrap_significance_with;
use hintedbt::quality::{score_pairs_embeddings, score_pairs_roundtrip};
use hintedbt::translit::{classify_pairs, CandidateGenerator};
use hintedbt::Execution;

const WORDS: &[&str] = &[
    "the", "river", "market", "कमल", "दिल्ली", "kamal", "delhi", "news", "said", "today", "minister", "train",
];

fn sentence(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
}

fn corpus(n: usize) -> Vec<SentencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|i| SentencePair::new(i as u64, sentence(&mut rng, 12), sentence(&mut rng, 12), Origin::Bt))
        .collect()
}

fn embeddings(n: usize, dim: usize, seed: u64) -> HashMap<u64, EmbeddingVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n as u64)
        .map(|i| {
            let v = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (i, EmbeddingVector::new(v).unwrap())
        })
        .collect()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench(c: &mut Criterion) {
    let pairs = corpus(20_000);
    let src = embeddings(pairs.len(), 256, 2);
    let tgt = embeddings(pairs.len(), 256, 3);
    let round_trip: Vec<String> = pairs.iter().map(|p| p.source.clone()).collect();
    let gen = CandidateGenerator::romanizer("hi").unwrap();
    let hyps: Vec<&str> = pairs.iter().map(|p| p.source.as_str()).collect();
    let refs: Vec<&str> = pairs.iter().map(|p| p.target.as_str()).collect();

    let mut group = c.benchmark_group("execution");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("embedding_cosine", name), &exec, |b, &e| {
            b.iter(|| score_pairs_embeddings(black_box(&pairs), &src, &tgt, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bot_jaccard", name), &exec, |b, &e| {
            b.iter(|| score_pairs_roundtrip(black_box(&pairs), &round_trip, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("translit_classify", name), &exec, |b, &e| {
            b.iter(|| classify_pairs(black_box(&pairs), &gen, e))
        });
        group.bench_with_input(BenchmarkId::new("bootstrap", name), &exec, |b, &e| {
            b.iter(|| bootstrap_significance_with(&hyps, &refs, &refs, 200, 500, 7, e).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
