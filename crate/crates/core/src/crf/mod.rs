//! Linear-chain conditional random field: inference, training and model files.

pub mod inference;
pub mod io;
pub mod lbfgs;
pub mod model;
pub mod train;

use rayon::prelude::*;

use crate::error::Result;
use crate::label::TokenTag;
use crate::reference::LabeledReference;

pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT};
pub use lbfgs::{LbfgsConfig, StopReason};
pub use model::{CrfModel, EncodedSequence, TagSet, Weights};
pub use train::{nll_and_gradient, prepare_instances, train, train_with_log, TrainConfig, TrainingInstance, TrainingLog};

/// Decodes every reference's tokens with `model`, in input order.
pub fn predict_all(model: &CrfModel, refs: &[LabeledReference]) -> Result<Vec<Vec<TokenTag>>> {
    refs.par_iter()
        .map(|r| model.predict(r.tokens()))
        .collect()
}
