//! Inline-XML corpora: one reference per line with `<field>…</field>` markup.
//!
//! An optional first line `#labels: author,title,…` declares the label set;
//! without it the set is inferred from the tags. A reference may also span
//! several lines between `<ref>` and `</ref>`; its lines are trimmed and
//! joined with single spaces. Closing tags may be written `</f>` or `<\f>`.
//! `pubPlace` reads as `location`, `authors` as `author` and `year` as `date`.
//! Text is unescaped for `&amp;`, `&lt;`, `&gt;`, `&quot;` and `&apos;`.

use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::{FieldLabel, LabelSet};
use crate::reference::LabeledReference;
use crate::tokenizer::TokenizerConfig;

use super::{check_single_line, labels_in, corpus_name, parse_labels_header, read_text, write_text, Corpus};

fn field_for_tag(name: &str) -> Option<FieldLabel> {
    match name.to_ascii_lowercase().as_str() {
        "pubplace" => Some(FieldLabel::Location),
        "authors" => Some(FieldLabel::Author),
        "year" => Some(FieldLabel::Date),
        other => other.parse().ok(),
    }
}

enum Piece<'a> {
    Text(&'a str),
    Open(&'a str),
    Close(&'a str),
}

/// Recognizes `<name>`, `</name>` and `<\name>` at the start of `s`.
fn tag_at(s: &str) -> Option<(Piece<'_>, usize)> {
    let rest = s.strip_prefix('<')?;
    let (closing, body) = match rest.as_bytes().first()? {
        b'/' | b'\\' => (true, &rest[1..]),
        _ => (false, rest),
    };
    let end = body.find('>')?;
    let name = &body[..end];
    let mut chars = name.chars();
    if !chars.next()?.is_ascii_alphabetic() || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return None;
    }
    let len = 1 + usize::from(closing) + end + 1;
    Some((if closing { Piece::Close(name) } else { Piece::Open(name) }, len))
}

fn pieces(line: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut text_start = 0;
    let mut i = 0;
    while let Some(off) = line[i..].find('<') {
        let at = i + off;
        match tag_at(&line[at..]) {
            Some((piece, len)) => {
                if at > text_start {
                    out.push(Piece::Text(&line[text_start..at]));
                }
                out.push(piece);
                i = at + len;
                text_start = i;
            }
            None => i = at + 1,
        }
    }
    if text_start < line.len() {
        out.push(Piece::Text(&line[text_start..]));
    }
    out
}

fn unescape_into(text: &str, out: &mut String) {
    let mut rest = text;
    while let Some(p) = rest.find('&') {
        out.push_str(&rest[..p]);
        rest = &rest[p..];
        let entity = [("&amp;", '&'), ("&lt;", '<'), ("&gt;", '>'), ("&quot;", '"'), ("&apos;", '\'')]
            .into_iter()
            .find(|(e, _)| rest.starts_with(e));
        match entity {
            Some((e, c)) => {
                out.push(c);
                rest = &rest[e.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
    out
}

/// Parses one marked-up reference into raw text and field byte spans.
pub fn parse_marked_line(line: &str) -> std::result::Result<(String, Vec<(FieldLabel, Range<usize>)>), String> {
    let mut raw = String::new();
    let mut spans = Vec::new();
    let mut open: Option<(FieldLabel, &str, usize)> = None;
    for piece in pieces(line) {
        match piece {
            Piece::Text(t) => unescape_into(t, &mut raw),
            Piece::Open(name) => {
                let field = field_for_tag(name).ok_or_else(|| format!("unknown field tag `<{name}>`"))?;
                if let Some((_, outer, _)) = open {
                    return Err(format!("tag `<{name}>` nested inside `<{outer}>`"));
                }
                open = Some((field, name, raw.len()));
            }
            Piece::Close(name) => {
                let field = field_for_tag(name).ok_or_else(|| format!("unknown field tag `</{name}>`"))?;
                match open.take() {
                    Some((f, _, start)) if f == field => {
                        if raw[start..].trim().is_empty() {
                            return Err(format!("empty `<{name}>` element"));
                        }
                        spans.push((f, start..raw.len()))
                    }
                    Some((_, outer, _)) => return Err(format!("`</{name}>` closes `<{outer}>`")),
                    None => return Err(format!("`</{name}>` without an opening tag")),
                }
            }
        }
    }
    if let Some((_, name, _)) = open {
        return Err(format!("`<{name}>` is never closed"));
    }
    Ok((raw, spans))
}

pub fn parse_inline_xml(text: &str, name: &str, config: &TokenizerConfig) -> Result<Corpus> {
    let mut declared: Option<LabelSet> = None;
    let mut instances = Vec::new();
    let mut block: Option<(usize, Vec<&str>)> = None;
    let mut seen_content = false;

    let push = |line_no: usize, text: &str, instances: &mut Vec<LabeledReference>| -> Result<()> {
        let (raw, spans) = parse_marked_line(text).map_err(|m| Error::Data(format!("line {line_no}: {m}")))?;
        let r = LabeledReference::from_spans(raw, &spans, config).map_err(|e| Error::Data(format!("line {line_no}: {e}")))?;
        instances.push(r);
        Ok(())
    };

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if let Some((start, parts)) = block.as_mut() {
            if trimmed == "</ref>" {
                let joined = parts.join(" ");
                let start = *start;
                block = None;
                push(start, &joined, &mut instances)?;
            } else if !trimmed.is_empty() {
                parts.push(trimmed);
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        if !seen_content {
            seen_content = true;
            if let Some(labels) = parse_labels_header(trimmed) {
                declared = Some(labels.map_err(|e| Error::Data(format!("line {line_no}: {e}")))?);
                continue;
            }
        }
        if trimmed == "<ref>" {
            block = Some((line_no, Vec::new()));
            continue;
        }
        push(line_no, line, &mut instances)?;
    }
    if let Some((start, _)) = block {
        return Err(Error::Data(format!("line {start}: `<ref>` block is never closed")));
    }
    match declared {
        Some(labels) => Corpus::new(name, labels, instances),
        None => Ok(Corpus::inferred(name, instances)),
    }
}

pub fn read_inline_xml(path: &Path) -> Result<Corpus> {
    read_inline_xml_with(path, &TokenizerConfig::default())
}

pub fn read_inline_xml_with(path: &Path, config: &TokenizerConfig) -> Result<Corpus> {
    parse_inline_xml(&read_text(path)?, &corpus_name(path), config)
}

/// Marks up one reference on a single line.
pub fn reference_to_inline_xml(r: &LabeledReference) -> String {
    let raw = r.raw();
    let mut out = String::new();
    let mut cursor = 0;
    for seg in r.segments() {
        let range = r.char_range(seg.span.clone());
        out.push_str(&escape(&raw[cursor..range.start]));
        let name = seg.field.as_str();
        out.push_str(&format!("<{name}>{}</{name}>", escape(&raw[range.clone()])));
        cursor = range.end;
    }
    out.push_str(&escape(&raw[cursor..]));
    out
}

/// One reference per line, preceded by a `#labels:` header only when the
/// declared labels differ from those the instances use.
pub fn to_inline_xml_string(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    if corpus.labels() != labels_in(corpus.instances()) {
        out = format!("#labels: {}\n", corpus.labels());
    }
    for (i, r) in corpus.instances().iter().enumerate() {
        check_single_line(r, i)?;
        out.push_str(&reference_to_inline_xml(r));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_inline_xml(corpus: &Corpus, path: &Path) -> Result<()> {
    write_text(path, &to_inline_xml_string(corpus)?)
}
