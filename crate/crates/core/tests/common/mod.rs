//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use citecrf_core::crf::inference::Potentials;
use citecrf_core::crf::model::EncodedSequence;
use citecrf_core::crf::{nll_and_gradient, CrfModel, TrainingInstance};
use citecrf_core::features::FeatureIndex;
use citecrf_core::label::check_iob2;
use citecrf_core::rng::{below, unit};
use citecrf_core::{Corpus, FeatureConfig, FieldLabel, LabelSet, TokenTag, TokenizerConfig};
use rand_core::RngCore;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// Raw chain potentials with owned storage.
#[derive(Debug, Clone)]
pub struct Chain {
    pub tags: usize,
    pub len: usize,
    pub emissions: Vec<f64>,
    pub transitions: Vec<f64>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

fn draw(rng: &mut impl RngCore, integer: bool, forbid: f64) -> f64 {
    if forbid > 0.0 && unit(rng) < forbid {
        f64::NEG_INFINITY
    } else if integer {
        below(rng, 5) as f64 - 2.0
    } else {
        6.0 * unit(rng) - 3.0
    }
}

impl Chain {
    /// Random potentials with `len ≤ max_len` and `tags ≤ max_tags`. Integer
    /// potentials make exact ties common; `forbid` is the chance that a
    /// transition, start or end entry is `-inf`.
    pub fn random(rng: &mut impl RngCore, max_len: usize, max_tags: usize, integer: bool, forbid: f64) -> Self {
        let len = 1 + below(rng, max_len as u64) as usize;
        let tags = 1 + below(rng, max_tags as u64) as usize;
        Chain {
            tags,
            len,
            emissions: (0..len * tags).map(|_| draw(rng, integer, 0.0)).collect(),
            transitions: (0..tags * tags).map(|_| draw(rng, integer, forbid)).collect(),
            start: (0..tags).map(|_| draw(rng, integer, forbid)).collect(),
            end: (0..tags).map(|_| draw(rng, integer, forbid)).collect(),
        }
    }

    pub fn potentials(&self) -> Potentials<'_> {
        Potentials::new(self.tags, &self.emissions, &self.transitions, &self.start, &self.end).unwrap()
    }

    pub fn score(&self, path: &[usize]) -> f64 {
        let l = self.tags;
        let mut s = self.start[path[0]] + self.end[path[path.len() - 1]];
        for (t, &y) in path.iter().enumerate() {
            s += self.emissions[t * l + y];
            if t > 0 {
                s += self.transitions[path[t - 1] * l + y];
            }
        }
        s
    }
}

/// Calls `f` on every sequence of `len` values below `tags`.
pub fn for_each_path(tags: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; len];
    loop {
        f(&path);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            path[i] += 1;
            if path[i] < tags {
                break;
            }
            path[i] = 0;
        }
    }
}

/// Exhaustive answers for a chain.
#[derive(Debug, Clone)]
pub struct Brute {
    pub log_z: f64,
    /// Best path under the tie-break (smallest when compared from the last
    /// position backwards) and its score; `None` if every path is forbidden.
    pub best: Option<(Vec<usize>, f64)>,
    pub marginals: Vec<f64>,
}

pub fn brute_force(c: &Chain) -> Brute {
    let mut scores = Vec::new();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_path(c.tags, c.len, |p| {
        let s = c.score(p);
        scores.push((p.to_vec(), s));
        if s == f64::NEG_INFINITY {
            return;
        }
        let better = match &best {
            None => true,
            Some((bp, bs)) => s > *bs || (s == *bs && p.iter().rev().lt(bp.iter().rev())),
        };
        if better {
            best = Some((p.to_vec(), s));
        }
    });
    let m = scores.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
    let log_z = if m == f64::NEG_INFINITY {
        m
    } else {
        m + scores.iter().map(|(_, s)| (s - m).exp()).sum::<f64>().ln()
    };
    let mut marginals = vec![0.0; c.len * c.tags];
    if log_z.is_finite() {
        for (p, s) in &scores {
            let w = (s - log_z).exp();
            for (t, &y) in p.iter().enumerate() {
                marginals[t * c.tags + y] += w;
            }
        }
    }
    Brute { log_z, best, marginals }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Labels `author` and `title` (five IOB2 tags) over `features` synthetic
/// feature names.
pub fn small_model(features: usize) -> CrfModel {
    let mut index = FeatureIndex::new();
    for i in 0..features {
        index.intern(&format!("f{i}"));
    }
    let labels: LabelSet = [FieldLabel::Author, FieldLabel::Title].into_iter().collect();
    CrfModel::new(labels, TokenizerConfig::default(), FeatureConfig::default(), index)
}

/// A random IOB2-valid tag sequence over the model's labels.
pub fn random_gold(rng: &mut impl RngCore, model: &CrfModel, len: usize) -> Vec<TokenTag> {
    let tags = model.tag_set().tags();
    let mut out: Vec<TokenTag> = (0..len).map(|_| tags[below(rng, tags.len() as u64) as usize]).collect();
    for t in 0..len {
        let prev = if t == 0 { None } else { Some(out[t - 1]) };
        if !out[t].may_follow(prev) {
            out[t] = TokenTag::B(out[t].field().unwrap());
        }
    }
    assert!(check_iob2(&out).is_ok());
    out
}

pub fn random_instance(rng: &mut impl RngCore, model: &CrfModel, max_len: usize) -> TrainingInstance {
    let len = 1 + below(rng, max_len as u64) as usize;
    let nf = model.weights().num_features() as u64;
    let positions: Vec<Vec<u32>> = (0..len)
        .map(|_| {
            let k = 1 + below(rng, 3);
            let mut ids: Vec<u32> = (0..k).map(|_| below(rng, nf) as u32).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    let gold = model.tag_ids(&random_gold(rng, model, len)).unwrap();
    TrainingInstance {
        seq: EncodedSequence::from_positions(&positions),
        gold,
    }
}

pub fn randomize_weights(rng: &mut impl RngCore, model: &mut CrfModel, scale: f64) {
    let params: Vec<f64> = (0..model.weights().num_params())
        .map(|_| scale * (2.0 * unit(rng) - 1.0))
        .collect();
    model.weights_mut().set_params(&params).unwrap();
}

/// Worst relative error between the analytic gradient and central finite
/// differences with step `h`, over every parameter.
pub fn gradient_check(model: &mut CrfModel, batch: &[TrainingInstance], l2: f64, h: f64) -> f64 {
    let (_, grad) = nll_and_gradient(model, batch, l2).unwrap();
    let base = model.weights().params();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        model.weights_mut().set_params(&p).unwrap();
        let (fp, _) = nll_and_gradient(model, batch, l2).unwrap();
        p[i] = base[i] - h;
        model.weights_mut().set_params(&p).unwrap();
        let (fm, _) = nll_and_gradient(model, batch, l2).unwrap();
        let numeric = (fp - fm) / (2.0 * h);
        let err = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-4);
        worst = worst.max(err);
    }
    model.weights_mut().set_params(&base).unwrap();
    worst
}

/// Reads a gold/predicted inline-XML pair over the same raw strings.
pub fn read_pair(gold: &str, pred: &str) -> (Corpus, Vec<Vec<TokenTag>>) {
    let g = citecrf_core::corpus::read_corpus(&fixture(gold)).unwrap();
    let p = citecrf_core::corpus::read_corpus(&fixture(pred)).unwrap();
    assert_eq!(g.len(), p.len());
    for (a, b) in g.instances().iter().zip(p.instances()) {
        assert_eq!(a.raw(), b.raw());
    }
    let tags = p.instances().iter().map(|r| r.tags().to_vec()).collect();
    (g, tags)
}
