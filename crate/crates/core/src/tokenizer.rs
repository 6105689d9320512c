//! Reversible, offset-preserving tokenization of reference strings.
//!
//! Whitespace separates tokens and is never part of one. Every punctuation
//! character is its own token; maximal runs of letters and of digits form
//! tokens. Offsets are byte offsets into the input.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{FieldLabel, TokenTag};
use crate::reference::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    /// Treat non-ASCII punctuation and symbols as single-character tokens.
    /// When off they are folded into the surrounding word.
    pub split_unicode_punctuation: bool,
    /// Split `vol44` into `vol` / `44`.
    pub split_digit_letter: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            split_unicode_punctuation: true,
            split_digit_letter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Space,
    Letter,
    Digit,
    Punct,
}

fn is_combining_mark(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

fn classify(c: char, config: &TokenizerConfig) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if c.is_numeric() {
        if config.split_digit_letter {
            CharClass::Digit
        } else {
            CharClass::Letter
        }
    } else if c.is_alphabetic() || is_combining_mark(c) {
        CharClass::Letter
    } else if c.is_ascii() || config.split_unicode_punctuation {
        CharClass::Punct
    } else {
        CharClass::Letter
    }
}

pub fn tokenize(raw: &str, config: &TokenizerConfig) -> Vec<Token> {
    let mut tokens = Vec::new();
    // (start offset, class) of the run being accumulated
    let mut open: Option<(usize, CharClass)> = None;

    let close = |open: &mut Option<(usize, CharClass)>, end: usize, tokens: &mut Vec<Token>| {
        if let Some((start, _)) = open.take() {
            tokens.push(Token::new(&raw[start..end], start, end));
        }
    };

    for (i, c) in raw.char_indices() {
        let class = classify(c, config);
        match (open, class) {
            (_, CharClass::Space) => close(&mut open, i, &mut tokens),
            (Some((_, cur)), next) if cur == next && next != CharClass::Punct => {}
            _ => {
                close(&mut open, i, &mut tokens);
                open = Some((i, class));
            }
        }
    }
    close(&mut open, raw.len(), &mut tokens);
    tokens
}

/// Labels tokens from byte-range field spans.
///
/// A token takes a span's field when at least half of its characters fall
/// inside that span (exactly half counts). The first token of each span's run
/// gets `B`, the rest `I`; uncovered tokens get `O`.
pub fn tags_from_spans(tokens: &[Token], spans: &[(FieldLabel, Range<usize>)]) -> Result<Vec<TokenTag>> {
    for w in spans.windows(2) {
        if w[1].1.start < w[0].1.end {
            return Err(Error::Structural(format!(
                "spans {:?} and {:?} overlap or are unsorted",
                w[0].1, w[1].1
            )));
        }
    }

    let mut tags = Vec::with_capacity(tokens.len());
    let mut prev_span: Option<usize> = None;
    let mut first_candidate = 0;
    for tok in tokens {
        let total = tok.surface.chars().count();
        while first_candidate < spans.len() && spans[first_candidate].1.end <= tok.start {
            first_candidate += 1;
        }
        let mut chosen = None;
        for (k, (_, span)) in spans.iter().enumerate().skip(first_candidate) {
            if span.start >= tok.end {
                break;
            }
            let lo = span.start.max(tok.start) - tok.start;
            let hi = span.end.min(tok.end) - tok.start;
            let inside = tok
                .surface
                .get(lo..hi)
                .ok_or_else(|| Error::Structural(format!("span {span:?} splits a character")))?
                .chars()
                .count();
            if 2 * inside >= total {
                chosen = Some(k);
                break;
            }
        }
        let tag = match chosen {
            Some(k) if prev_span == Some(k) => TokenTag::I(spans[k].0),
            Some(k) => TokenTag::B(spans[k].0),
            None => TokenTag::O,
        };
        prev_span = chosen;
        tags.push(tag);
    }
    Ok(tags)
}
