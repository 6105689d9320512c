//! Labeled reference strings and field segments.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::label::{check_iob2, FieldLabel, TokenTag};
use crate::tokenizer::{tags_from_spans, tokenize, TokenizerConfig};

/// A token with its byte offsets into the source string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, start: usize, end: usize) -> Self {
        Token {
            surface: surface.into(),
            start,
            end,
        }
    }
}

/// A reference string with its tokens and one IOB2 tag per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledReference {
    raw: String,
    tokens: Vec<Token>,
    tags: Vec<TokenTag>,
}

impl LabeledReference {
    /// Validates offsets against `raw` and IOB2 well-formedness.
    pub fn new(raw: impl Into<String>, tokens: Vec<Token>, tags: Vec<TokenTag>) -> Result<Self> {
        let raw = raw.into();
        if tokens.len() != tags.len() {
            return Err(Error::Structural(format!(
                "{} tokens but {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        let mut cursor = 0;
        for (i, tok) in tokens.iter().enumerate() {
            if tok.start < cursor || tok.end <= tok.start {
                return Err(Error::Structural(format!(
                    "token {i} at {}..{} overlaps or is out of order",
                    tok.start, tok.end
                )));
            }
            if raw.get(tok.start..tok.end) != Some(tok.surface.as_str()) {
                return Err(Error::Structural(format!(
                    "token {i} surface `{}` does not match the raw text at {}..{}",
                    tok.surface, tok.start, tok.end
                )));
            }
            cursor = tok.end;
        }
        check_iob2(&tags)
            .map_err(|i| Error::Structural(format!("I tag without matching predecessor at token {i}")))?;
        Ok(LabeledReference { raw, tokens, tags })
    }

    /// Tokenizes `raw` and labels tokens from character spans.
    pub fn from_spans(
        raw: impl Into<String>,
        spans: &[(FieldLabel, Range<usize>)],
        config: &TokenizerConfig,
    ) -> Result<Self> {
        let raw = raw.into();
        let tokens = tokenize(&raw, config);
        let tags = tags_from_spans(&tokens, spans)?;
        Self::new(raw, tokens, tags)
    }

    /// Tokenizes `raw` and tags everything `O`.
    pub fn unlabeled(raw: impl Into<String>, config: &TokenizerConfig) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw, config);
        let tags = vec![TokenTag::O; tokens.len()];
        LabeledReference { raw, tokens, tags }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn tags(&self) -> &[TokenTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Same text and tokens with a different tag sequence.
    pub fn with_tags(&self, tags: Vec<TokenTag>) -> Result<Self> {
        Self::new(self.raw.clone(), self.tokens.clone(), tags)
    }

    pub fn segments(&self) -> Vec<FieldSegment> {
        segments_from_tags(&self.tags, &self.tokens).expect("validated at construction")
    }

    /// Byte range in `raw` covered by a token span.
    pub fn char_range(&self, tokens: Range<usize>) -> Range<usize> {
        self.tokens[tokens.start].start..self.tokens[tokens.end - 1].end
    }
}

/// A maximal run of tokens carrying one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSegment {
    pub field: FieldLabel,
    /// Half-open token index range.
    pub span: Range<usize>,
    /// Normalized text of the covered tokens.
    pub text: String,
}

/// Derives maximal segments: each starts at a `B` and absorbs following `I`s
/// of the same field.
///
/// Covered surfaces are joined with a single space wherever the source had a
/// gap between tokens and directly otherwise, then normalized.
pub fn segments_from_tags(tags: &[TokenTag], tokens: &[Token]) -> Result<Vec<FieldSegment>> {
    if tags.len() != tokens.len() {
        return Err(Error::Structural(format!(
            "{} tags for {} tokens",
            tags.len(),
            tokens.len()
        )));
    }
    check_iob2(tags)
        .map_err(|i| Error::Structural(format!("I tag without matching predecessor at token {i}")))?;

    let mut segments = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let TokenTag::B(field) = tags[i] else {
            i += 1;
            continue;
        };
        let start = i;
        i += 1;
        while i < tags.len() && tags[i] == TokenTag::I(field) {
            i += 1;
        }
        segments.push(FieldSegment {
            field,
            span: start..i,
            text: normalize_segment_text(&join_surfaces(&tokens[start..i])),
        });
    }
    Ok(segments)
}

fn join_surfaces(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut prev_end = None;
    for tok in tokens {
        if matches!(prev_end, Some(end) if end < tok.start) {
            out.push(' ');
        }
        out.push_str(&tok.surface);
        prev_end = Some(tok.end);
    }
    out
}

/// Paints IOB2 tags for a list of non-overlapping token spans.
///
/// Inverse of [`segments_from_tags`] on the (field, span) projection.
pub fn paint_tags(segments: &[(FieldLabel, Range<usize>)], len: usize) -> Result<Vec<TokenTag>> {
    let mut tags = vec![TokenTag::O; len];
    let mut cursor = 0;
    for (field, span) in segments {
        if span.start < cursor || span.end <= span.start || span.end > len {
            return Err(Error::Structural(format!(
                "segment {}..{} is empty, overlapping or out of range",
                span.start, span.end
            )));
        }
        tags[span.start] = TokenTag::B(*field);
        for tag in &mut tags[span.start + 1..span.end] {
            *tag = TokenTag::I(*field);
        }
        cursor = span.end;
    }
    Ok(tags)
}

const FIELD_FINAL_PUNCT: [char; 4] = ['.', ',', ';', ':'];

/// Collapses whitespace runs to one space and trims surrounding whitespace and
/// trailing `.`, `,`, `;`, `:`.
pub fn normalize_segment_text(text: &str) -> String {
    let mut out = text.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let trimmed = out.trim_end_matches(FIELD_FINAL_PUNCT).trim_end();
        if trimmed.len() == out.len() {
            break;
        }
        out.truncate(trimmed.len());
    }
    out
}
