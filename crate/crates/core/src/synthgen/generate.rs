//! Sampling (record, style) pairs into labeled corpora.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reference::LabeledReference;
use crate::rng::{below, seeded};
use crate::tokenizer::TokenizerConfig;

use super::record::BibRecord;
use super::render::{check_rendering, render_with, RenderOptions};
use super::style::StyleTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub per_author: bool,
    /// Draw distinct (record, style) pairs; `n` may not exceed their number.
    pub dedup: bool,
    pub tokenizer: TokenizerConfig,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            per_author: false,
            dedup: true,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

/// Indices of the sampled `(record, style)` pairs, in sample order.
///
/// With `dedup` the pairs are the first `n` positions of a seeded
/// Fisher–Yates shuffle of the `records × styles` grid (pair `k` is record
/// `k / styles`, style `k % styles`). Without it, sample `i` draws one index
/// from ChaCha8 stream `i` under `seed`, so each sample is independent of
/// every other.
pub fn draw_pairs(records: usize, styles: usize, n: usize, seed: u64, dedup: bool) -> Result<Vec<(usize, usize)>> {
    if n == 0 {
        return Err(Error::Usage("sample count must be >= 1".into()));
    }
    if records == 0 || styles == 0 {
        return Err(Error::Usage("need at least one record and one style".into()));
    }
    let total = (records as u64)
        .checked_mul(styles as u64)
        .ok_or_else(|| Error::Usage("too many record/style pairs".into()))?;
    let split = |k: u64| ((k / styles as u64) as usize, (k % styles as u64) as usize);
    if dedup {
        if n as u64 > total {
            return Err(Error::Usage(format!(
                "cannot draw {n} distinct pairs from {records} records x {styles} styles"
            )));
        }
        let mut rng = seeded(seed);
        let mut moved: HashMap<u64, u64> = HashMap::new();
        let mut out = Vec::with_capacity(n);
        for i in 0..n as u64 {
            let j = i + below(&mut rng, total - i);
            let at_j = *moved.get(&j).unwrap_or(&j);
            let at_i = *moved.get(&i).unwrap_or(&i);
            moved.insert(j, at_i);
            out.push(split(at_j));
        }
        Ok(out)
    } else {
        Ok((0..n as u64)
            .map(|i| {
                let mut rng = seeded(seed);
                rng.set_stream(i);
                split(below(&mut rng, total))
            })
            .collect())
    }
}

/// Renders `n` sampled pairs and labels them through the tokenizer. Every
/// rendering is checked with [`check_rendering`].
pub fn generate_corpus(
    records: &[BibRecord],
    styles: &[StyleTemplate],
    n: usize,
    seed: u64,
    options: &GenerateOptions,
) -> Result<Vec<LabeledReference>> {
    let pairs = draw_pairs(records.len(), styles.len(), n, seed, options.dedup)?;
    let render_opts = RenderOptions {
        per_author: options.per_author,
    };
    pairs
        .par_iter()
        .map(|&(r, s)| {
            let rendered = render_with(&records[r], &styles[s], render_opts)
                .map_err(|e| annotate(e, r, &styles[s].name))?;
            check_rendering(&records[r], &styles[s], &rendered, &options.tokenizer)
        })
        .collect()
}

fn annotate(e: Error, record: usize, style: &str) -> Error {
    match e {
        Error::Data(m) => Error::Data(format!("record {record}: {m}")),
        Error::Template(m) => Error::Template(format!("record {record}, style `{style}`: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_draws_distinct_pairs() {
        let pairs = draw_pairs(5, 4, 20, 3, true).unwrap();
        let mut s = pairs.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 20);
        assert_eq!(pairs, draw_pairs(5, 4, 20, 3, true).unwrap());
        assert!(matches!(draw_pairs(5, 4, 21, 3, true), Err(Error::Usage(_))));
    }

    #[test]
    fn independent_draws_are_prefix_stable() {
        let a = draw_pairs(7, 3, 50, 9, false).unwrap();
        let b = draw_pairs(7, 3, 10, 9, false).unwrap();
        assert_eq!(&a[..10], &b[..]);
    }
}
