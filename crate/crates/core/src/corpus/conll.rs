//! CoNLL corpora: `surface<TAB>tag` per token, a blank line between references.
//!
//! The writer precedes each reference with `# text = <raw>` so offsets and
//! spacing survive a round trip; without that line the raw text is the
//! surfaces joined by single spaces. An optional first line `#labels: …`
//! declares the label set.

use std::path::Path;

use crate::error::{Error, Result};
use crate::label::{LabelSet, TokenTag};
use crate::reference::{LabeledReference, Token};

use super::{check_single_line, corpus_name, parse_labels_header, read_text, write_text, Corpus};

const TEXT_PREFIX: &str = "# text = ";

#[derive(Default)]
struct Pending {
    first_line: usize,
    text: Option<String>,
    rows: Vec<(usize, String, TokenTag)>,
}

impl Pending {
    fn is_empty(&self) -> bool {
        self.text.is_none() && self.rows.is_empty()
    }

    fn finish(self) -> Result<LabeledReference> {
        let Pending { first_line, text, rows } = self;
        let (raw, tokens) = match text {
            Some(raw) => {
                let mut tokens = Vec::with_capacity(rows.len());
                let mut cursor = 0;
                for (line, surface, _) in &rows {
                    let at = raw[cursor..]
                        .find(surface.as_str())
                        .map(|p| cursor + p)
                        .ok_or_else(|| Error::Data(format!("line {line}: token `{surface}` not found in the text line")))?;
                    if !raw[cursor..at].chars().all(char::is_whitespace) {
                        return Err(Error::Data(format!(
                            "line {line}: text before token `{surface}` is not covered by any token"
                        )));
                    }
                    tokens.push(Token::new(surface.clone(), at, at + surface.len()));
                    cursor = at + surface.len();
                }
                (raw, tokens)
            }
            None => {
                let mut raw = String::new();
                let mut tokens = Vec::with_capacity(rows.len());
                for (_, surface, _) in &rows {
                    if !raw.is_empty() {
                        raw.push(' ');
                    }
                    tokens.push(Token::new(surface.clone(), raw.len(), raw.len() + surface.len()));
                    raw.push_str(surface);
                }
                (raw, tokens)
            }
        };
        let tags = rows.into_iter().map(|(_, _, t)| t).collect();
        LabeledReference::new(raw, tokens, tags).map_err(|e| Error::Data(format!("reference starting at line {first_line}: {e}")))
    }
}

pub fn parse_conll(text: &str, name: &str) -> Result<Corpus> {
    let mut declared: Option<LabelSet> = None;
    let mut instances = Vec::new();
    let mut pending = Pending::default();
    let mut first = true;

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            if !pending.is_empty() {
                instances.push(std::mem::take(&mut pending).finish()?);
            }
            continue;
        }
        if first {
            first = false;
            if let Some(labels) = parse_labels_header(line.trim()) {
                declared = Some(labels.map_err(|e| Error::Data(format!("line {line_no}: {e}")))?);
                continue;
            }
        }
        if pending.is_empty() {
            pending.first_line = line_no;
        }
        if let Some(raw) = line.strip_prefix(TEXT_PREFIX) {
            if pending.text.is_some() || !pending.rows.is_empty() {
                return Err(Error::Data(format!("line {line_no}: text line inside a reference")));
            }
            pending.text = Some(raw.to_string());
            continue;
        }
        let (surface, tag) = line
            .split_once('\t')
            .ok_or_else(|| Error::Data(format!("line {line_no}: expected `surface<TAB>tag`")))?;
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::Data(format!("line {line_no}: invalid token surface `{surface}`")));
        }
        let tag: TokenTag = tag
            .trim()
            .parse()
            .map_err(|e| Error::Data(format!("line {line_no}: {e}")))?;
        pending.rows.push((line_no, surface.to_string(), tag));
    }
    if !pending.is_empty() {
        instances.push(pending.finish()?);
    }
    match declared {
        Some(labels) => Corpus::new(name, labels, instances),
        None => Ok(Corpus::inferred(name, instances)),
    }
}

pub fn read_conll(path: &Path) -> Result<Corpus> {
    parse_conll(&read_text(path)?, &corpus_name(path))
}

pub fn to_conll_string(corpus: &Corpus) -> Result<String> {
    if corpus.is_empty() {
        return Ok(String::new());
    }
    let mut out = format!("#labels: {}\n\n", corpus.labels());
    for (i, r) in corpus.instances().iter().enumerate() {
        check_single_line(r, i)?;
        out.push_str(TEXT_PREFIX);
        out.push_str(r.raw());
        out.push('\n');
        for (tok, tag) in r.tokens().iter().zip(r.tags()) {
            out.push_str(&tok.surface);
            out.push('\t');
            out.push_str(&tag.to_string());
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_conll(corpus: &Corpus, path: &Path) -> Result<()> {
    write_text(path, &to_conll_string(corpus)?)
}
