//! Fixtures shared by the benchmarks: seeded synthetic corpora and a small
//! trained model.

use citecrf_core::crf::{train, TrainConfig};
use citecrf_core::synthgen::{builtin_styles, generate_corpus, random_records, GenerateOptions};
use citecrf_core::{Corpus, CrfModel, FeatureConfig};

/// `n` labeled references rendered through every shipped style.
pub fn corpus(n: usize, seed: u64) -> Corpus {
    let records = random_records(n.max(50), seed);
    let instances = generate_corpus(&records, &builtin_styles(), n, seed, &GenerateOptions::default())
        .expect("shipped styles render random records");
    Corpus::inferred("bench", instances)
}

/// A model trained for a bounded number of epochs on `n` references.
pub fn model(n: usize, seed: u64) -> CrfModel {
    let cfg = TrainConfig {
        max_epochs: 50,
        ..TrainConfig::default()
    };
    train(&corpus(n, seed), &FeatureConfig::default(), &cfg).expect("training succeeds")
}

/// Raw reference strings of a corpus.
pub fn raw_strings(corpus: &Corpus) -> Vec<String> {
    corpus.instances().iter().map(|r| r.raw().to_string()).collect()
}
