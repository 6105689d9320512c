use crate::error::{Error, Result};
use crate::features::{extract_sequence, FeatureConfig, FeatureIndex};
use crate::label::{FieldLabel, LabelSet, TokenTag};
use crate::reference::{LabeledReference, Token};
use crate::tokenizer::{tokenize, TokenizerConfig};

use super::inference::{self, Potentials};

/// Tag vocabulary of a model: `O` first, then `B-f`, `I-f` for each field in
/// canonical order. Ids index weight rows and break decoding ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    labels: LabelSet,
    tags: Vec<TokenTag>,
    rank: [Option<usize>; FieldLabel::ALL.len()],
}

impl TagSet {
    pub fn new(labels: LabelSet) -> Self {
        let mut tags = vec![TokenTag::O];
        let mut rank = [None; FieldLabel::ALL.len()];
        for (i, f) in labels.iter().enumerate() {
            rank[f.index()] = Some(i);
            tags.push(TokenTag::B(f));
            tags.push(TokenTag::I(f));
        }
        TagSet { labels, tags, rank }
    }

    pub fn labels(&self) -> LabelSet {
        self.labels
    }

    pub fn tags(&self) -> &[TokenTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, tag: TokenTag) -> Option<usize> {
        match tag {
            TokenTag::O => Some(0),
            TokenTag::B(f) => self.rank[f.index()].map(|r| 1 + 2 * r),
            TokenTag::I(f) => self.rank[f.index()].map(|r| 2 + 2 * r),
        }
    }

    pub fn tag(&self, id: usize) -> TokenTag {
        self.tags[id]
    }

    /// IOB2 admissibility of `prev → next` (`prev = None` at the start).
    pub fn allowed(&self, prev: Option<usize>, next: usize) -> bool {
        self.tags[next].may_follow(prev.map(|p| self.tags[p]))
    }
}

/// Model weights. Emissions are feature-major (`feature * num_tags + tag`);
/// IOB2-forbidden transitions and starts hold `-inf` and are not parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    num_features: usize,
    num_tags: usize,
    emission: Vec<f64>,
    transition: Vec<f64>,
    start: Vec<f64>,
    end: Vec<f64>,
    free_transitions: Vec<usize>,
    free_starts: Vec<usize>,
}

impl Weights {
    pub fn zeros(tags: &TagSet, num_features: usize) -> Self {
        let l = tags.len();
        let mut transition = vec![0.0; l * l];
        let mut free_transitions = Vec::new();
        for a in 0..l {
            for b in 0..l {
                if tags.allowed(Some(a), b) {
                    free_transitions.push(a * l + b);
                } else {
                    transition[a * l + b] = f64::NEG_INFINITY;
                }
            }
        }
        let mut start = vec![0.0; l];
        let mut free_starts = Vec::new();
        for (b, s) in start.iter_mut().enumerate() {
            if tags.allowed(None, b) {
                free_starts.push(b);
            } else {
                *s = f64::NEG_INFINITY;
            }
        }
        Weights {
            num_features,
            num_tags: l,
            emission: vec![0.0; num_features * l],
            transition,
            start,
            end: vec![0.0; l],
            free_transitions,
            free_starts,
        }
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    pub fn emission(&self, feature: u32, tag: usize) -> f64 {
        self.emission[feature as usize * self.num_tags + tag]
    }

    pub fn set_emission(&mut self, feature: u32, tag: usize, w: f64) {
        self.emission[feature as usize * self.num_tags + tag] = w;
    }

    pub fn transition(&self, prev: usize, next: usize) -> f64 {
        self.transition[prev * self.num_tags + next]
    }

    /// Fails for IOB2-forbidden pairs, whose weight is fixed at `-inf`.
    pub fn set_transition(&mut self, prev: usize, next: usize, w: f64) -> Result<()> {
        let k = prev * self.num_tags + next;
        if self.transition[k] == f64::NEG_INFINITY {
            return Err(Error::Structural(format!("transition {prev}→{next} is forbidden")));
        }
        self.transition[k] = w;
        Ok(())
    }

    pub fn start(&self, tag: usize) -> f64 {
        self.start[tag]
    }

    pub fn set_start(&mut self, tag: usize, w: f64) -> Result<()> {
        if self.start[tag] == f64::NEG_INFINITY {
            return Err(Error::Structural(format!("tag {tag} cannot start a sequence")));
        }
        self.start[tag] = w;
        Ok(())
    }

    pub fn end(&self, tag: usize) -> f64 {
        self.end[tag]
    }

    pub fn set_end(&mut self, tag: usize, w: f64) {
        self.end[tag] = w;
    }

    /// Number of trainable parameters.
    pub fn num_params(&self) -> usize {
        self.emission.len() + self.free_transitions.len() + self.free_starts.len() + self.end.len()
    }

    /// Flattens the trainable parameters: emissions, admissible transitions,
    /// admissible starts, ends.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        p.extend_from_slice(&self.emission);
        p.extend(self.free_transitions.iter().map(|&k| self.transition[k]));
        p.extend(self.free_starts.iter().map(|&k| self.start[k]));
        p.extend_from_slice(&self.end);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Structural(format!(
                "{} parameters supplied, model has {}",
                params.len(),
                self.num_params()
            )));
        }
        let (em, rest) = params.split_at(self.emission.len());
        self.emission.copy_from_slice(em);
        let (tr, rest) = rest.split_at(self.free_transitions.len());
        for (&k, &v) in self.free_transitions.iter().zip(tr) {
            self.transition[k] = v;
        }
        let (st, en) = rest.split_at(self.free_starts.len());
        for (&k, &v) in self.free_starts.iter().zip(st) {
            self.start[k] = v;
        }
        self.end.copy_from_slice(en);
        Ok(())
    }

    pub(crate) fn free_transitions(&self) -> &[usize] {
        &self.free_transitions
    }

    pub(crate) fn free_starts(&self) -> &[usize] {
        &self.free_starts
    }
}

/// Active feature ids per position (CSR layout). Unknown features are dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EncodedSequence {
    offsets: Vec<usize>,
    ids: Vec<u32>,
}

impl EncodedSequence {
    pub fn from_positions(positions: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(positions.len() + 1);
        let mut ids = Vec::new();
        offsets.push(0);
        for p in positions {
            ids.extend_from_slice(p);
            offsets.push(ids.len());
        }
        EncodedSequence { offsets, ids }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn features(&self, t: usize) -> &[u32] {
        &self.ids[self.offsets[t]..self.offsets[t + 1]]
    }
}

/// A trained (or hand-built) linear-chain CRF together with everything needed
/// to reproduce its input pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    tags: TagSet,
    tokenizer: TokenizerConfig,
    features: FeatureConfig,
    index: FeatureIndex,
    weights: Weights,
}

impl CrfModel {
    /// A zero-weight model over `labels`.
    pub fn new(labels: LabelSet, tokenizer: TokenizerConfig, features: FeatureConfig, mut index: FeatureIndex) -> Self {
        index.freeze();
        let tags = TagSet::new(labels);
        let weights = Weights::zeros(&tags, index.len());
        CrfModel {
            tags,
            tokenizer,
            features,
            index,
            weights,
        }
    }

    pub fn tag_set(&self) -> &TagSet {
        &self.tags
    }

    pub fn labels(&self) -> LabelSet {
        self.tags.labels()
    }

    pub fn tokenizer_config(&self) -> &TokenizerConfig {
        &self.tokenizer
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.features
    }

    pub fn feature_index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Weights {
        &mut self.weights
    }

    pub fn encode(&self, tokens: &[Token]) -> EncodedSequence {
        let positions: Vec<Vec<u32>> = extract_sequence(tokens, &self.features)
            .into_iter()
            .map(|names| names.iter().filter_map(|n| self.index.get(n)).collect())
            .collect();
        EncodedSequence::from_positions(&positions)
    }

    /// `len × num_tags` emission log-potentials.
    pub fn emission_scores(&self, seq: &EncodedSequence) -> Vec<f64> {
        emission_scores(&self.weights, seq)
    }

    fn with_potentials<R>(&self, seq: &EncodedSequence, f: impl FnOnce(&Potentials<'_>) -> Result<R>) -> Result<R> {
        let emissions = self.emission_scores(seq);
        let p = Potentials::new(
            self.weights.num_tags,
            &emissions,
            &self.weights.transition,
            &self.weights.start,
            &self.weights.end,
        )?;
        f(&p)
    }

    pub fn tag_ids(&self, tags: &[TokenTag]) -> Result<Vec<usize>> {
        tags.iter()
            .map(|&t| {
                self.tags
                    .id(t)
                    .ok_or_else(|| Error::Structural(format!("tag {t} is not in the model's tag set")))
            })
            .collect()
    }

    pub fn score_path(&self, seq: &EncodedSequence, tags: &[TokenTag]) -> Result<f64> {
        if tags.len() != seq.len() {
            return Err(Error::Structural(format!(
                "{} tags for a sequence of length {}",
                tags.len(),
                seq.len()
            )));
        }
        let ids = self.tag_ids(tags)?;
        self.with_potentials(seq, |p| inference::score_path(p, &ids))
    }

    pub fn log_partition(&self, seq: &EncodedSequence) -> Result<f64> {
        self.with_potentials(seq, inference::log_partition)
    }

    pub fn viterbi(&self, seq: &EncodedSequence) -> Result<Vec<TokenTag>> {
        let (path, _) = self.with_potentials(seq, inference::viterbi)?;
        Ok(path.into_iter().map(|id| self.tags.tag(id)).collect())
    }

    /// Posterior tag probabilities per position, columns in tag-id order.
    pub fn marginals(&self, seq: &EncodedSequence) -> Result<Vec<Vec<f64>>> {
        let flat = self.with_potentials(seq, inference::marginals)?;
        Ok(flat.chunks(self.tags.len()).map(<[f64]>::to_vec).collect())
    }

    /// Decodes tags for an already tokenized reference.
    pub fn predict(&self, tokens: &[Token]) -> Result<Vec<TokenTag>> {
        if tokens.is_empty() {
            return Ok(Vec::new());
        }
        self.viterbi(&self.encode(tokens))
    }

    /// Tokenizes and labels a raw reference string.
    pub fn label(&self, raw: &str) -> Result<LabeledReference> {
        let tokens = tokenize(raw, &self.tokenizer);
        let tags = self.predict(&tokens)?;
        LabeledReference::new(raw, tokens, tags)
    }

    pub(crate) fn from_parts(
        tags: TagSet,
        tokenizer: TokenizerConfig,
        features: FeatureConfig,
        index: FeatureIndex,
        weights: Weights,
    ) -> Self {
        CrfModel {
            tags,
            tokenizer,
            features,
            index,
            weights,
        }
    }
}

pub(crate) fn emission_scores(weights: &Weights, seq: &EncodedSequence) -> Vec<f64> {
    let l = weights.num_tags;
    let mut out = vec![0.0; seq.len() * l];
    for (t, row) in out.chunks_mut(l).enumerate() {
        for &f in seq.features(t) {
            let w = &weights.emission[f as usize * l..(f as usize + 1) * l];
            for (o, wi) in row.iter_mut().zip(w) {
                *o += wi;
            }
        }
    }
    out
}
