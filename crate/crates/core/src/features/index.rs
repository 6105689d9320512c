use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{extract_sequence, FeatureConfig};
use crate::error::{Error, Result};
use crate::reference::LabeledReference;

/// Dense ids for feature names, contiguous from 0 in insertion order.
///
/// Once frozen, unknown names map to `None` instead of receiving new ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct FeatureIndex {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    frozen: bool,
}

impl FeatureIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, assigning the next id if the index is open.
    pub fn intern(&mut self, name: &str) -> Option<u32> {
        if let Some(&id) = self.ids.get(name) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        Some(id)
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl From<Vec<String>> for FeatureIndex {
    /// Deserialized indices are always frozen.
    fn from(names: Vec<String>) -> Self {
        let ids = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        FeatureIndex {
            names,
            ids,
            frozen: true,
        }
    }
}

impl From<FeatureIndex> for Vec<String> {
    fn from(index: FeatureIndex) -> Self {
        index.names
    }
}

/// Interns every feature occurring at least `min_count` times, in order of
/// first occurrence, and freezes the result.
pub fn build_index(corpus: &[LabeledReference], config: &FeatureConfig, min_count: usize) -> Result<FeatureIndex> {
    if corpus.is_empty() {
        return Err(Error::Usage("cannot build a feature index from an empty corpus".into()));
    }
    if min_count == 0 {
        return Err(Error::Usage("min-count must be at least 1".into()));
    }
    let mut counts: IndexMap<String, usize> = IndexMap::new();
    for reference in corpus {
        for feats in extract_sequence(reference.tokens(), config) {
            for name in feats {
                *counts.entry(name).or_insert(0) += 1;
            }
        }
    }
    let mut index = FeatureIndex::new();
    for (name, count) in &counts {
        if *count >= min_count {
            index.intern(name);
        }
    }
    index.freeze();
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract;
    use crate::tokenizer::TokenizerConfig;
    use std::collections::BTreeSet;

    fn corpus(lines: &[&str]) -> Vec<LabeledReference> {
        lines
            .iter()
            .map(|l| LabeledReference::unlabeled(*l, &TokenizerConfig::default()))
            .collect()
    }

    #[test]
    fn single_token_corpus_indexes_every_name() {
        let c = corpus(&["2015"]);
        let cfg = FeatureConfig::default();
        let index = build_index(&c, &cfg, 1).unwrap();
        let distinct: BTreeSet<_> = extract(c[0].tokens(), 0, &cfg).unwrap().into_iter().collect();
        assert_eq!(index.len(), distinct.len());
        assert!(index.is_frozen());
    }

    #[test]
    fn min_count_drops_singletons() {
        let c = corpus(&["alpha 2015", "beta 2015"]);
        let cfg = FeatureConfig::default();
        let index = build_index(&c, &cfg, 2).unwrap();
        assert!(index.get("w[0]=2015").is_some());
        assert!(index.get("w[0]=alpha").is_none());
        assert!(index.get("bias").is_some());
    }

    #[test]
    fn construction_is_deterministic() {
        let c = corpus(&["C. Lemke, 2015.", "Budka, M. (2014) Title. Journal, 3(1), 1-2."]);
        let cfg = FeatureConfig::default();
        let a = serde_json::to_vec(&build_index(&c, &cfg, 1).unwrap()).unwrap();
        let b = serde_json::to_vec(&build_index(&c, &cfg, 1).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frozen_index_never_grows() {
        let mut index = FeatureIndex::new();
        assert_eq!(index.intern("a"), Some(0));
        assert_eq!(index.intern("b"), Some(1));
        assert_eq!(index.intern("a"), Some(0));
        index.freeze();
        assert_eq!(index.intern("c"), None);
        assert_eq!(index.len(), 2);
        let round: FeatureIndex = serde_json::from_str(&serde_json::to_string(&index).unwrap()).unwrap();
        assert_eq!(round.get("b"), Some(1));
        assert!(round.is_frozen());
    }

    #[test]
    fn empty_corpus_is_usage_error() {
        assert!(matches!(build_index(&[], &FeatureConfig::default(), 1), Err(Error::Usage(_))));
    }
}
