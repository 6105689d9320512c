//! Rendering records through style templates with exact field spans.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::label::FieldLabel;
use crate::reference::{normalize_segment_text, LabeledReference};
use crate::tokenizer::TokenizerConfig;

use super::record::{BibRecord, ContainerKind, Person};
use super::style::{AuthorOptions, Condition, DateFormat, Directive, Element, NameOrder, SlotField, StyleTemplate, TitleCase};

/// Rendered text with byte spans of each field, ordered and non-overlapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReference {
    pub text: String,
    pub spans: Vec<(FieldLabel, Range<usize>)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderOptions {
    /// One `author` span per name instead of one for the whole list.
    pub per_author: bool,
}

/// Author list text and the byte range of each rendered name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormattedAuthors {
    pub text: String,
    pub names: Vec<Range<usize>>,
}

fn initials(given: &str, opts: &AuthorOptions) -> String {
    given
        .split_whitespace()
        .map(|word| {
            word.split('-')
                .filter_map(|part| part.chars().find(|c| c.is_alphabetic()))
                .map(|c| format!("{c}{}", opts.initial_punct))
                .collect::<Vec<_>>()
                .join("-")
        })
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(&opts.initial_sep)
}

fn format_name(p: &Person, family_first: bool, opts: &AuthorOptions) -> String {
    let given = if opts.initials {
        initials(&p.given, opts)
    } else {
        p.given.clone()
    };
    match (given.is_empty(), family_first) {
        (true, _) => p.family.clone(),
        (false, true) => format!("{}{}{}", p.family, opts.sort_sep, given),
        (false, false) => format!("{given} {}", p.family),
    }
}

/// Formats an author list: name order, initials, delimiters, final
/// conjunction and et-al truncation.
pub fn format_authors(authors: &[Person], opts: &AuthorOptions) -> Result<String> {
    Ok(format_authors_with(authors, opts, &[])?.text)
}

pub fn format_authors_with(authors: &[Person], opts: &AuthorOptions, directives: &[Directive]) -> Result<FormattedAuthors> {
    if authors.is_empty() {
        return Err(Error::Template("author list is empty".into()));
    }
    let truncated = opts.et_al_threshold > 0 && authors.len() > opts.et_al_threshold;
    let shown = if truncated {
        &authors[..opts.et_al_first.min(authors.len())]
    } else {
        authors
    };
    let names: Vec<String> = shown
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let family_first = match opts.order {
                NameOrder::GivenFirst => false,
                NameOrder::FamilyFirst => true,
                NameOrder::FirstFamily => i == 0,
            };
            apply_directives(&format_name(p, family_first, opts), directives)
        })
        .collect();

    let conj = if opts.conjunction.is_empty() {
        opts.delimiter.clone()
    } else {
        opts.conjunction.clone()
    };
    let n = names.len();
    let mut text = String::new();
    let mut ranges = Vec::with_capacity(n);
    for (i, name) in names.iter().enumerate() {
        if i > 0 {
            let sep = if truncated || i + 1 < n {
                opts.delimiter.clone()
            } else if n >= 3 && opts.oxford {
                format!("{}{}", opts.delimiter.trim_end(), conj)
            } else {
                conj.clone()
            };
            text.push_str(&sep);
        }
        let start = text.len();
        text.push_str(name);
        ranges.push(start..text.len());
    }
    if truncated {
        text.push_str(&opts.et_al_delimiter);
        text.push_str(&opts.et_al_marker);
    }
    Ok(FormattedAuthors { text, names: ranges })
}

fn is_acronym(word: &str) -> bool {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
        None => String::new(),
    }
}

/// Lowercases every word except the first, the first after a colon, and
/// all-caps acronyms.
pub fn sentence_case(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut capital_next = true;
    for (i, word) in text.split(' ').enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if is_acronym(word) {
            out.push_str(word);
        } else if capital_next {
            out.push_str(&capitalize(word));
        } else {
            out.extend(word.chars().flat_map(char::to_lowercase));
        }
        if !word.is_empty() {
            capital_next = word.ends_with(':');
        }
    }
    out
}

fn apply_directives(text: &str, directives: &[Directive]) -> String {
    let mut s = text.to_string();
    for d in directives {
        s = match d {
            Directive::Upper => s.to_uppercase(),
            Directive::Lower => s.to_lowercase(),
            Directive::Sentence => sentence_case(&s),
        };
    }
    s
}

fn container_label(record: &BibRecord) -> FieldLabel {
    match record.container_kind {
        ContainerKind::Journal => FieldLabel::Journal,
        ContainerKind::Proceedings => FieldLabel::Booktitle,
    }
}

pub fn slot_label(field: SlotField, record: &BibRecord) -> FieldLabel {
    match field {
        SlotField::Authors => FieldLabel::Author,
        SlotField::Title => FieldLabel::Title,
        SlotField::Container => container_label(record),
        SlotField::Year => FieldLabel::Date,
        SlotField::Volume => FieldLabel::Volume,
        SlotField::Issue => FieldLabel::Issue,
        SlotField::Pages => FieldLabel::Pages,
        SlotField::Publisher => FieldLabel::Publisher,
        SlotField::Editors => FieldLabel::Editor,
        SlotField::Location => FieldLabel::Location,
        SlotField::Institution => FieldLabel::Institution,
        SlotField::Note => FieldLabel::Note,
        SlotField::Url => FieldLabel::Web,
    }
}

fn present(field: SlotField, r: &BibRecord) -> bool {
    match field {
        SlotField::Authors => !r.authors.is_empty(),
        SlotField::Title | SlotField::Container | SlotField::Year => true,
        SlotField::Volume => r.volume.is_some(),
        SlotField::Issue => r.issue.is_some(),
        SlotField::Pages => r.pages.is_some(),
        SlotField::Publisher => r.publisher.is_some(),
        SlotField::Editors => r.editors.is_some(),
        SlotField::Location => r.location.is_some(),
        SlotField::Institution => r.institution.is_some(),
        SlotField::Note => r.note.is_some(),
        SlotField::Url => r.url.is_some(),
    }
}

fn holds(c: Condition, r: &BibRecord) -> bool {
    match c {
        Condition::Present(f) => present(f, r),
        Condition::Journal => r.container_kind == ContainerKind::Journal,
        Condition::Proceedings => r.container_kind == ContainerKind::Proceedings,
    }
}

fn plain_value(field: SlotField, r: &BibRecord, style: &StyleTemplate) -> Option<String> {
    match field {
        SlotField::Authors | SlotField::Year => None,
        SlotField::Title => Some(match style.title_case {
            TitleCase::None => r.title.clone(),
            TitleCase::Sentence => sentence_case(&r.title),
        }),
        SlotField::Container => Some(r.container.clone()),
        SlotField::Volume => r.volume.clone(),
        SlotField::Issue => r.issue.clone(),
        SlotField::Pages => r.pages.as_ref().map(|p| match &p.last {
            Some(last) => format!("{}{}{}", p.first, style.page_delimiter, last),
            None => p.first.clone(),
        }),
        SlotField::Publisher => r.publisher.clone(),
        SlotField::Editors => r.editors.clone(),
        SlotField::Location => r.location.clone(),
        SlotField::Institution => r.institution.clone(),
        SlotField::Note => r.note.clone(),
        SlotField::Url => r.url.clone(),
    }
}

struct Renderer<'a> {
    record: &'a BibRecord,
    style: &'a StyleTemplate,
    options: RenderOptions,
    out: RenderedReference,
}

impl Renderer<'_> {
    fn push_span(&mut self, label: FieldLabel, text: &str) {
        let start = self.out.text.len();
        self.out.text.push_str(text);
        self.out.spans.push((label, start..self.out.text.len()));
    }

    fn slot(&mut self, field: SlotField, directives: &[Directive], in_group: bool) -> Result<()> {
        if !present(field, self.record) {
            return if in_group {
                Ok(())
            } else {
                Err(Error::Template(format!(
                    "style `{}` renders `{field}` outside a group but the record has none",
                    self.style.name
                )))
            };
        }
        let label = slot_label(field, self.record);
        match field {
            SlotField::Authors => {
                let f = format_authors_with(&self.record.authors, &self.style.author, directives)?;
                let base = self.out.text.len();
                self.out.text.push_str(&f.text);
                if self.options.per_author {
                    for r in f.names {
                        self.out.spans.push((label, base + r.start..base + r.end));
                    }
                } else {
                    self.out.spans.push((label, base..self.out.text.len()));
                }
            }
            SlotField::Year => {
                let year = apply_directives(&self.record.year.to_string(), directives);
                match self.style.date {
                    DateFormat::Plain => self.push_span(label, &year),
                    DateFormat::Parenthesized => {
                        self.out.text.push('(');
                        self.push_span(label, &year);
                        self.out.text.push(')');
                    }
                }
            }
            _ => {
                let v = plain_value(field, self.record, self.style).expect("present slot has a value");
                self.push_span(label, &apply_directives(&v, directives));
            }
        }
        Ok(())
    }

    fn elements(&mut self, elements: &[Element], in_group: bool) -> Result<()> {
        for e in elements {
            match e {
                Element::Literal(s) => self.out.text.push_str(s),
                Element::Slot { field, directives } => self.slot(*field, directives, in_group)?,
                Element::Group { conditions, elements } => {
                    if conditions.iter().all(|c| holds(*c, self.record)) {
                        self.elements(elements, true)?;
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn render(record: &BibRecord, style: &StyleTemplate) -> Result<RenderedReference> {
    render_with(record, style, RenderOptions::default())
}

pub fn render_with(record: &BibRecord, style: &StyleTemplate, options: RenderOptions) -> Result<RenderedReference> {
    record.validate()?;
    let mut r = Renderer {
        record,
        style,
        options,
        out: RenderedReference {
            text: String::new(),
            spans: Vec::new(),
        },
    };
    r.elements(&style.elements, false)?;
    Ok(r.out)
}

fn fold(s: &str) -> String {
    s.to_lowercase()
}

/// Checks a rendering against its record and converts it to a labeled
/// reference: spans are ordered, non-empty and trimmed; each span's text
/// recovers the record field (case-insensitively, author names by family
/// name); and re-deriving segments from token tags reproduces every span's
/// normalized text.
pub fn check_rendering(
    record: &BibRecord,
    style: &StyleTemplate,
    rendered: &RenderedReference,
    tokenizer: &TokenizerConfig,
) -> Result<LabeledReference> {
    let fail = |m: String| Error::Template(format!("style `{}`: {m} in {:?}", style.name, rendered.text));
    let text = &rendered.text;
    let mut prev_end = 0;
    let mut author_spans = Vec::new();
    for (label, range) in &rendered.spans {
        let s = text
            .get(range.clone())
            .ok_or_else(|| fail(format!("{label} span {range:?} is out of bounds")))?;
        if range.start < prev_end || s.is_empty() || s.trim() != s {
            return Err(fail(format!("{label} span {range:?} is empty, untrimmed or overlapping")));
        }
        prev_end = range.end;
        let expected = match label {
            FieldLabel::Author => {
                author_spans.push(s);
                continue;
            }
            FieldLabel::Date => record.year.to_string(),
            FieldLabel::Title => record.title.clone(),
            FieldLabel::Journal | FieldLabel::Booktitle => record.container.clone(),
            _ => {
                let slot = SlotField::ALL
                    .into_iter()
                    .find(|f| slot_label(*f, record) == *label)
                    .ok_or_else(|| fail(format!("unexpected {label} span")))?;
                plain_value(slot, record, style).unwrap_or_default()
            }
        };
        if fold(s) != fold(&expected) {
            return Err(fail(format!("{label} span `{s}` does not recover `{expected}`")));
        }
    }
    let authors = fold(&author_spans.join(" "));
    let mut from = 0;
    let shown = if style.author.et_al_threshold > 0 && record.authors.len() > style.author.et_al_threshold {
        style.author.et_al_first.min(record.authors.len())
    } else {
        record.authors.len()
    };
    if !author_spans.is_empty() {
        for p in &record.authors[..shown] {
            let fam = fold(&p.family);
            match authors[from..].find(&fam) {
                Some(at) => from += at + fam.len(),
                None => return Err(fail(format!("author `{}` missing from author spans", p.family))),
            }
        }
    }

    let labeled = LabeledReference::from_spans(text.clone(), &rendered.spans, tokenizer)
        .map_err(|e| fail(format!("labeling failed: {e}")))?;
    let segments = labeled.segments();
    if segments.len() != rendered.spans.len() {
        return Err(fail(format!(
            "{} spans but {} segments",
            rendered.spans.len(),
            segments.len()
        )));
    }
    for (seg, (label, range)) in segments.iter().zip(&rendered.spans) {
        let want = normalize_segment_text(&text[range.clone()]);
        if seg.field != *label || normalize_segment_text(&seg.text) != want {
            return Err(fail(format!("segment {}:`{}` does not match span {label}:`{want}`", seg.field, seg.text)));
        }
    }
    Ok(labeled)
}
