//! JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureIndex};
use crate::label::LabelSet;
use crate::tokenizer::TokenizerConfig;

use super::model::{CrfModel, TagSet, Weights};

pub const MODEL_FORMAT: &str = "citecrf-model/1";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    labels: LabelSet,
    tokenizer: TokenizerConfig,
    features: FeatureConfig,
    index: Vec<String>,
    /// Non-zero emission weights as `[feature, tag, weight]`.
    emissions: Vec<(u32, usize, f64)>,
    /// Row-major `prev × next`; `null` marks a forbidden transition.
    transitions: Vec<Vec<Option<f64>>>,
    start: Vec<Option<f64>>,
    end: Vec<f64>,
}

fn finite_or_null(w: f64) -> Option<f64> {
    w.is_finite().then_some(w)
}

pub fn model_to_json(model: &CrfModel) -> Result<String> {
    let w = model.weights();
    let l = w.num_tags();
    let mut emissions = Vec::new();
    for f in 0..w.num_features() as u32 {
        for y in 0..l {
            let v = w.emission(f, y);
            if v != 0.0 {
                emissions.push((f, y, v));
            }
        }
    }
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        labels: model.labels(),
        tokenizer: *model.tokenizer_config(),
        features: model.feature_config().clone(),
        index: model.feature_index().names().to_vec(),
        emissions,
        transitions: (0..l)
            .map(|p| (0..l).map(|n| finite_or_null(w.transition(p, n))).collect())
            .collect(),
        start: (0..l).map(|y| finite_or_null(w.start(y))).collect(),
        end: (0..l).map(|y| w.end(y)).collect(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Structural(format!("cannot serialize model: {e}")))
}

pub fn model_from_json(text: &str) -> Result<CrfModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Data(format!("invalid model file: {e}")))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::Data(format!(
            "unsupported model format `{}` (expected `{MODEL_FORMAT}`)",
            file.format
        )));
    }
    let tags = TagSet::new(file.labels);
    let l = tags.len();
    let index = FeatureIndex::from(file.index);
    let mut weights = Weights::zeros(&tags, index.len());

    for &(f, y, v) in &file.emissions {
        if f as usize >= index.len() || y >= l || !v.is_finite() {
            return Err(Error::Data(format!("invalid emission entry [{f}, {y}, {v}]")));
        }
        weights.set_emission(f, y, v);
    }
    if file.transitions.len() != l || file.transitions.iter().any(|r| r.len() != l) {
        return Err(Error::Data(format!("transition matrix must be {l}x{l}")));
    }
    if file.start.len() != l || file.end.len() != l {
        return Err(Error::Data(format!("start and end vectors must have {l} entries")));
    }
    for (p, row) in file.transitions.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            match (tags.allowed(Some(p), n), v) {
                (true, Some(v)) if v.is_finite() => weights.set_transition(p, n, *v)?,
                (false, None) => {}
                _ => return Err(Error::Data(format!("transition {p}->{n} does not match the tag set"))),
            }
        }
    }
    for (y, v) in file.start.iter().enumerate() {
        match (tags.allowed(None, y), v) {
            (true, Some(v)) if v.is_finite() => weights.set_start(y, *v)?,
            (false, None) => {}
            _ => return Err(Error::Data(format!("start weight {y} does not match the tag set"))),
        }
    }
    for (y, v) in file.end.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Data(format!("end weight {y} is not finite")));
        }
        weights.set_end(y, *v);
    }
    Ok(CrfModel::from_parts(tags, file.tokenizer, file.features, index, weights))
}

pub fn save_model(model: &CrfModel, path: &Path) -> Result<()> {
    let text = model_to_json(model)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<CrfModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
