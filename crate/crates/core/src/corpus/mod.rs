//! Labeled corpora: validation, deterministic splitting, sampling and label filtering.

pub mod conll;
pub mod xml;

use std::path::Path;

use crate::error::{Error, Result};
use crate::label::{LabelSet, TokenTag};
use crate::reference::LabeledReference;
use crate::rng;

pub use conll::{parse_conll, read_conll, to_conll_string, write_conll};
pub use xml::{parse_inline_xml, read_inline_xml, to_inline_xml_string, write_inline_xml};

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    labels: LabelSet,
    instances: Vec<LabeledReference>,
}

/// Fields carried by the tags of `instances`.
pub fn labels_in(instances: &[LabeledReference]) -> LabelSet {
    instances
        .iter()
        .flat_map(|r| r.tags().iter().filter_map(|t| t.field()))
        .collect()
}

impl Corpus {
    /// Fails if any tag's field lies outside `labels`.
    pub fn new(name: impl Into<String>, labels: LabelSet, instances: Vec<LabeledReference>) -> Result<Self> {
        for (i, r) in instances.iter().enumerate() {
            if let Some(f) = r.tags().iter().filter_map(|t| t.field()).find(|f| !labels.contains(*f)) {
                return Err(Error::Data(format!(
                    "instance {i} carries `{f}`, which is not among the declared labels ({labels})"
                )));
            }
        }
        Ok(Corpus {
            name: name.into(),
            labels,
            instances,
        })
    }

    /// Declares exactly the fields that occur in `instances`.
    pub fn inferred(name: impl Into<String>, instances: Vec<LabeledReference>) -> Self {
        let labels = labels_in(&instances);
        Corpus {
            name: name.into(),
            labels,
            instances,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> LabelSet {
        self.labels
    }

    pub fn instances(&self) -> &[LabeledReference] {
        &self.instances
    }

    pub fn into_instances(self) -> Vec<LabeledReference> {
        self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn subset(&self, name: String, idx: &[usize]) -> Corpus {
        Corpus {
            name,
            labels: self.labels,
            instances: idx.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Seeded shuffle, then the first `floor(ratio·N)` instances train and the
    /// rest evaluate.
    pub fn split(&self, ratio: f64, seed: u64) -> Result<(Corpus, Corpus)> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Usage(format!("split ratio must lie in (0, 1), got {ratio}")));
        }
        if self.is_empty() {
            return Err(Error::Usage(format!("cannot split empty corpus `{}`", self.name)));
        }
        let perm = rng::permutation(self.len(), seed);
        let cut = ((ratio * self.len() as f64) + 1e-9).floor() as usize;
        let cut = cut.min(self.len());
        Ok((
            self.subset(format!("{}.train", self.name), &perm[..cut]),
            self.subset(format!("{}.eval", self.name), &perm[cut..]),
        ))
    }

    /// `n` distinct instances in seeded order: the first `n` of the same
    /// permutation `split` uses.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Corpus> {
        if n == 0 || n > self.len() {
            return Err(Error::Usage(format!(
                "sample size must lie in 1..={}, got {n}",
                self.len()
            )));
        }
        let perm = rng::permutation(self.len(), seed);
        Ok(self.subset(self.name.clone(), &perm[..n]))
    }

    /// Relabels every token of a field outside `keep` as `O`; the declared
    /// labels become `keep`.
    pub fn filter_fields(&self, keep: LabelSet) -> Result<Corpus> {
        if keep.is_empty() {
            return Err(Error::Usage("the kept label set is empty".into()));
        }
        let instances = self
            .instances
            .iter()
            .map(|r| {
                let tags = r
                    .tags()
                    .iter()
                    .map(|&t| match t.field() {
                        Some(f) if !keep.contains(f) => TokenTag::O,
                        _ => t,
                    })
                    .collect();
                r.with_tags(tags)
            })
            .collect::<Result<_>>()
            .map_err(|e| Error::Structural(format!("filtering produced invalid tags: {e}")))?;
        Ok(Corpus {
            name: self.name.clone(),
            labels: keep,
            instances,
        })
    }

    /// Appends `other`, declaring the union of both label sets.
    pub fn concat(&self, other: &Corpus) -> Corpus {
        let mut instances = self.instances.clone();
        instances.extend_from_slice(&other.instances);
        Corpus {
            name: self.name.clone(),
            labels: self.labels.union(other.labels),
            instances,
        }
    }
}

/// Corpus file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    InlineXml,
    Conll,
}

impl Format {
    /// `.conll` and `.tsv` are CoNLL; anything else is inline XML.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(e) if e == "conll" || e == "tsv" => Format::Conll,
            _ => Format::InlineXml,
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    match Format::from_path(path) {
        Format::Conll => read_conll(path),
        Format::InlineXml => read_inline_xml(path),
    }
}

pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    match Format::from_path(path) {
        Format::Conll => write_conll(corpus, path),
        Format::InlineXml => write_inline_xml(corpus, path),
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn corpus_name(path: &Path) -> String {
    stem(path)
}

/// Parses a `#labels: a,b,c` header line.
pub(crate) fn parse_labels_header(line: &str) -> Option<Result<LabelSet>> {
    line.strip_prefix("#labels:").map(|rest| LabelSet::parse_list(rest.trim()))
}

pub(crate) fn check_single_line(r: &LabeledReference, i: usize) -> Result<()> {
    if r.raw().contains(['\n', '\r']) {
        return Err(Error::Data(format!("instance {i}: raw text spans several lines")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::FieldLabel;
    use crate::tokenizer::TokenizerConfig;

    fn tiny(n: usize) -> Corpus {
        let cfg = TokenizerConfig::default();
        let refs = (0..n)
            .map(|i| {
                let raw = format!("Smith {i}");
                LabeledReference::from_spans(&raw, &[(FieldLabel::Author, 0..5), (FieldLabel::Date, 6..raw.len())], &cfg).unwrap()
            })
            .collect();
        Corpus::inferred("tiny", refs)
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let c = tiny(7800);
        let (a, b) = c.split(0.7, 7).unwrap();
        assert_eq!((a.len(), b.len()), (5460, 2340));
        let (a, b) = tiny(2).split(0.5, 1).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn split_is_a_partition() {
        let c = tiny(57);
        let (a, b) = c.split(0.3, 11).unwrap();
        let mut raws: Vec<&str> = a.instances().iter().chain(b.instances()).map(|r| r.raw()).collect();
        raws.sort();
        let mut orig: Vec<&str> = c.instances().iter().map(|r| r.raw()).collect();
        orig.sort();
        assert_eq!(raws, orig);
        assert_eq!(c.split(0.3, 11).unwrap(), (a, b));
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(matches!(tiny(0).split(0.5, 1), Err(Error::Usage(_))));
        assert!(matches!(tiny(3).split(1.0, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn sample_bounds() {
        let c = tiny(10);
        assert_eq!(c.sample(10, 3).unwrap().len(), 10);
        assert_eq!(c.sample(1, 3).unwrap(), c.sample(1, 3).unwrap());
        assert!(matches!(c.sample(11, 3), Err(Error::Usage(_))));
        assert!(matches!(c.sample(0, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn filter_drops_fields() {
        let c = tiny(3);
        let kept = c.filter_fields(LabelSet::empty().with(FieldLabel::Author)).unwrap();
        assert_eq!(kept.labels(), LabelSet::empty().with(FieldLabel::Author));
        for r in kept.instances() {
            assert_eq!(r.tags()[1], TokenTag::O);
            assert_eq!(r.tags()[0], TokenTag::B(FieldLabel::Author));
        }
        assert_eq!(c.filter_fields(c.labels()).unwrap(), c);
        assert!(matches!(c.filter_fields(LabelSet::empty()), Err(Error::Usage(_))));
    }

    #[test]
    fn undeclared_label_is_rejected() {
        let c = tiny(1);
        let err = Corpus::new("x", LabelSet::empty().with(FieldLabel::Author), c.instances().to_vec());
        assert!(matches!(err, Err(Error::Data(_))));
    }
}
