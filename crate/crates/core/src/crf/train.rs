//! Maximum conditional likelihood training with an L2 penalty.
//!
//! Objective: `Σ_i (log Z(x_i) − score(x_i, y_i)) + λ/2 ‖w‖²` over all trainable
//! weights. Per-instance posteriors are computed in parallel; every reduction
//! runs in a fixed order, so results do not depend on the thread count.

use std::ops::Range;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{build_index, FeatureConfig};
use crate::reference::LabeledReference;
use crate::tokenizer::TokenizerConfig;

use super::inference::{posteriors, score_path, Potentials};
use super::lbfgs::{minimize, LbfgsConfig, StopReason};
use super::model::{CrfModel, EncodedSequence, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// L2 strength λ.
    pub l2: f64,
    /// Optimizer iterations (full passes over the corpus).
    pub max_epochs: usize,
    /// Relative objective decrease over the last five epochs below which
    /// training stops.
    pub tolerance: f64,
    /// Recorded for provenance. Training starts from zero weights and the
    /// batch optimizer draws no random numbers.
    pub seed: u64,
    /// Features seen fewer times than this are dropped from the index.
    pub min_feature_count: usize,
    /// Tokenizer stored in the model and used when labeling raw strings.
    pub tokenizer: TokenizerConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1.0,
            max_epochs: 200,
            tolerance: 1e-4,
            seed: 0,
            min_feature_count: 1,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Usage(format!("l2 must be a finite value >= 0, got {}", self.l2)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Usage(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.min_feature_count == 0 {
            return Err(Error::Usage("min feature count must be >= 1".into()));
        }
        Ok(())
    }
}

/// An encoded sequence with gold tag ids.
#[derive(Debug, Clone)]
pub struct TrainingInstance {
    pub seq: EncodedSequence,
    pub gold: Vec<usize>,
}

/// Encodes references against the model's feature index and tag set.
pub fn prepare_instances(model: &CrfModel, refs: &[LabeledReference]) -> Result<Vec<TrainingInstance>> {
    refs.par_iter()
        .enumerate()
        .map(|(i, r)| {
            let gold = model
                .tag_ids(r.tags())
                .map_err(|e| Error::Data(format!("instance {i}: {e}")))?;
            Ok(TrainingInstance {
                seq: model.encode(r.tokens()),
                gold,
            })
        })
        .collect()
}

/// Regularized negative log-likelihood and its gradient, in the parameter
/// layout of [`Weights::params`].
pub fn nll_and_gradient(model: &CrfModel, batch: &[TrainingInstance], l2: f64) -> Result<(f64, Vec<f64>)> {
    let objective = Objective::new(model.weights(), batch, l2)?;
    objective.evaluate(&model.weights().params())
}

const BLOCK_INSTANCES: usize = 4096;
const FEATURE_CHUNK: usize = 2048;

/// Instances grouped for gradient accumulation, with an inverted index from
/// feature id to the marginal rows where it fires.
struct Block {
    instances: Range<usize>,
    rows: usize,
    feature_offsets: Vec<usize>,
    occurrences: Vec<u32>,
}

struct Objective<'a> {
    num_features: usize,
    num_tags: usize,
    /// Full transition index → parameter index (None for forbidden pairs).
    transition_param: Vec<Option<usize>>,
    start_param: Vec<Option<usize>>,
    end_offset: usize,
    num_params: usize,
    instances: &'a [TrainingInstance],
    blocks: Vec<Block>,
    observed: Vec<f64>,
    l2: f64,
}

impl<'a> Objective<'a> {
    fn new(shape: &Weights, instances: &'a [TrainingInstance], l2: f64) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::Usage("empty training batch".into()));
        }
        let (f_count, l) = (shape.num_features(), shape.num_tags());
        let mut next = f_count * l;
        let mut transition_param = vec![None; l * l];
        for &k in shape.free_transitions() {
            transition_param[k] = Some(next);
            next += 1;
        }
        let mut start_param = vec![None; l];
        for &k in shape.free_starts() {
            start_param[k] = Some(next);
            next += 1;
        }
        let end_offset = next;
        let num_params = next + l;

        let mut observed = vec![0.0; num_params];
        for (i, inst) in instances.iter().enumerate() {
            if inst.seq.is_empty() || inst.gold.len() != inst.seq.len() {
                return Err(Error::Data(format!(
                    "instance {i}: {} tokens with {} gold tags",
                    inst.seq.len(),
                    inst.gold.len()
                )));
            }
            for (t, &y) in inst.gold.iter().enumerate() {
                if y >= l {
                    return Err(Error::Data(format!("instance {i}: tag id {y} out of range")));
                }
                for &f in inst.seq.features(t) {
                    observed[f as usize * l + y] += 1.0;
                }
                match t {
                    0 => match start_param[y] {
                        Some(p) => observed[p] += 1.0,
                        None => return Err(Error::Data(format!("instance {i}: gold path starts with a forbidden tag"))),
                    },
                    _ => match transition_param[inst.gold[t - 1] * l + y] {
                        Some(p) => observed[p] += 1.0,
                        None => return Err(Error::Data(format!("instance {i}: gold path has a forbidden transition at {t}"))),
                    },
                }
            }
            observed[end_offset + inst.gold[inst.gold.len() - 1]] += 1.0;
        }

        let blocks = (0..instances.len())
            .step_by(BLOCK_INSTANCES)
            .map(|s| build_block(instances, s..(s + BLOCK_INSTANCES).min(instances.len()), f_count))
            .collect();

        Ok(Objective {
            num_features: f_count,
            num_tags: l,
            transition_param,
            start_param,
            end_offset,
            num_params,
            instances,
            blocks,
            observed,
            l2,
        })
    }

    fn evaluate(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let l = self.num_tags;
        let emission = &params[..self.num_features * l];
        let transitions: Vec<f64> = self
            .transition_param
            .iter()
            .map(|p| p.map_or(f64::NEG_INFINITY, |p| params[p]))
            .collect();
        let start: Vec<f64> = self
            .start_param
            .iter()
            .map(|p| p.map_or(f64::NEG_INFINITY, |p| params[p]))
            .collect();
        let end = &params[self.end_offset..self.end_offset + l];

        let mut value = 0.0;
        let mut grad = vec![0.0; self.num_params];
        let mut pairwise_total = vec![0.0; l * l];

        for block in &self.blocks {
            let mut buffer = vec![0.0; block.rows * l];
            let insts = &self.instances[block.instances.clone()];
            let mut slices: Vec<&mut [f64]> = Vec::with_capacity(insts.len());
            let mut rest = buffer.as_mut_slice();
            for inst in insts {
                let (head, tail) = rest.split_at_mut(inst.seq.len() * l);
                slices.push(head);
                rest = tail;
            }

            let stats: Vec<(f64, f64, Vec<f64>)> = insts
                .par_iter()
                .zip(slices.into_par_iter())
                .enumerate()
                .map(|(k, (inst, out))| {
                    let i = block.instances.start + k;
                    let emissions = emission_scores(emission, l, &inst.seq);
                    let p = Potentials::new(l, &emissions, &transitions, &start, end)?;
                    let gold = score_path(&p, &inst.gold)?;
                    if !gold.is_finite() {
                        return Err(Error::Numeric(format!("instance {i}: gold path score is {gold}")));
                    }
                    let post = posteriors(&p, true).map_err(|e| match e {
                        Error::Numeric(m) => Error::Numeric(format!("instance {i}: {m}")),
                        other => other,
                    })?;
                    out.copy_from_slice(&post.unary);
                    Ok((post.log_z, gold, post.pairwise))
                })
                .collect::<Result<_>>()?;

            let mut row = 0;
            for (inst, (log_z, gold, pairwise)) in insts.iter().zip(&stats) {
                value += log_z - gold;
                for (acc, v) in pairwise_total.iter_mut().zip(pairwise) {
                    *acc += v;
                }
                let len = inst.seq.len();
                for y in 0..l {
                    if let Some(p) = self.start_param[y] {
                        grad[p] += buffer[row * l + y];
                    }
                    grad[self.end_offset + y] += buffer[(row + len - 1) * l + y];
                }
                row += len;
            }

            grad[..self.num_features * l]
                .par_chunks_mut(FEATURE_CHUNK * l)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let first = c * FEATURE_CHUNK;
                    for (local, g) in chunk.chunks_mut(l).enumerate() {
                        let f = first + local;
                        for &r in &block.occurrences[block.feature_offsets[f]..block.feature_offsets[f + 1]] {
                            let m = &buffer[r as usize * l..(r as usize + 1) * l];
                            for (gi, mi) in g.iter_mut().zip(m) {
                                *gi += mi;
                            }
                        }
                    }
                });
        }

        for (k, p) in self.transition_param.iter().enumerate() {
            if let Some(p) = p {
                grad[*p] += pairwise_total[k];
            }
        }
        let mut penalty = 0.0;
        for ((g, o), w) in grad.iter_mut().zip(&self.observed).zip(params) {
            *g += self.l2 * w - o;
            penalty += w * w;
        }
        value += 0.5 * self.l2 * penalty;
        if !value.is_finite() {
            return Err(Error::Numeric(format!("objective is {value}")));
        }
        Ok((value, grad))
    }
}

fn build_block(instances: &[TrainingInstance], range: Range<usize>, num_features: usize) -> Block {
    let mut counts = vec![0usize; num_features + 1];
    let mut rows = 0;
    for inst in &instances[range.clone()] {
        for t in 0..inst.seq.len() {
            for &f in inst.seq.features(t) {
                counts[f as usize + 1] += 1;
            }
        }
        rows += inst.seq.len();
    }
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
    let feature_offsets = counts.clone();
    let mut fill = counts;
    let mut occurrences = vec![0u32; feature_offsets[num_features]];
    let mut row = 0u32;
    for inst in &instances[range.clone()] {
        for t in 0..inst.seq.len() {
            for &f in inst.seq.features(t) {
                occurrences[fill[f as usize]] = row;
                fill[f as usize] += 1;
            }
            row += 1;
        }
    }
    Block {
        instances: range,
        rows,
        feature_offsets,
        occurrences,
    }
}

fn emission_scores(emission: &[f64], l: usize, seq: &EncodedSequence) -> Vec<f64> {
    let mut out = vec![0.0; seq.len() * l];
    for (t, row) in out.chunks_mut(l).enumerate() {
        for &f in seq.features(t) {
            let w = &emission[f as usize * l..(f as usize + 1) * l];
            for (o, wi) in row.iter_mut().zip(w) {
                *o += wi;
            }
        }
    }
    out
}

/// One optimizer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub stop: StopReason,
    pub num_features: usize,
    pub num_instances: usize,
}

/// Trains a model on every non-empty instance of `corpus`.
pub fn train(corpus: &Corpus, features: &FeatureConfig, config: &TrainConfig) -> Result<CrfModel> {
    Ok(train_with_log(corpus, features, config)?.0)
}

pub fn train_with_log(corpus: &Corpus, features: &FeatureConfig, config: &TrainConfig) -> Result<(CrfModel, TrainingLog)> {
    config.validate()?;
    let usable: Vec<LabeledReference> = corpus.instances().iter().filter(|r| !r.is_empty()).cloned().collect();
    if usable.is_empty() {
        return Err(Error::Usage(format!("corpus `{}` has no usable instances", corpus.name())));
    }
    let index = build_index(&usable, features, config.min_feature_count)?;
    let mut model = CrfModel::new(corpus.labels(), config.tokenizer, features.clone(), index);
    let instances = prepare_instances(&model, &usable)?;
    info!(
        "training on {} instances, {} features, {} tags",
        instances.len(),
        model.feature_index().len(),
        model.tag_set().len()
    );

    let objective = Objective::new(model.weights(), &instances, config.l2)?;
    let lbfgs = LbfgsConfig {
        max_iterations: config.max_epochs,
        tolerance: config.tolerance,
        ..LbfgsConfig::default()
    };
    let mut epochs = Vec::new();
    let result = minimize(
        vec![0.0; model.weights().num_params()],
        |x| objective.evaluate(x),
        &lbfgs,
        |epoch, value| {
            debug!("epoch {epoch} objective {value:.6}");
            epochs.push(EpochRecord { epoch, objective: value });
        },
    )?;
    info!(
        "stopped after {} epochs ({:?}), objective {:.6}",
        epochs.len().saturating_sub(1),
        result.stop,
        result.value
    );
    model.weights_mut().set_params(&result.x)?;
    let log = TrainingLog {
        epochs,
        stop: result.stop,
        num_features: model.feature_index().len(),
        num_instances: instances.len(),
    };
    Ok((model, log))
}
