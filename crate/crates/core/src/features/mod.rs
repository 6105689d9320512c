//! Token feature templates and the interned feature index.
//!
//! Every feature name starts with its template id, and window features carry
//! their offset in brackets (`w[-1]=in`, `shape[0]=Xx`, `gaz[+2]=months`), so
//! names from different templates never collide. Offsets outside the sequence
//! emit a boundary sentinel (`w[-2]=<BOS>`) instead of neighbor features.

mod gazetteer;
mod index;

pub use gazetteer::{parse_list, Gazetteers};
pub use index::{build_index, FeatureIndex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reference::Token;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Neighbor radius in tokens.
    pub window: usize,
    /// Prefix and suffix lengths emitted for the center token.
    pub affix_lengths: Vec<usize>,
    pub use_shape: bool,
    pub use_gazetteers: bool,
    pub gazetteers: Gazetteers,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window: 2,
            affix_lengths: vec![1, 2, 3, 4],
            use_shape: true,
            use_gazetteers: true,
            gazetteers: Gazetteers::builtin(),
        }
    }
}

/// Per-token attributes shared by every window position that looks at it.
struct TokenView<'a> {
    lower: String,
    shape: String,
    is_digit: bool,
    /// Four digits between 1500 and 2100.
    is_year: bool,
    is_punct: bool,
    is_cap: bool,
    gaz: &'a [String],
}

impl<'a> TokenView<'a> {
    fn new(surface: &str, config: &'a FeatureConfig) -> Self {
        let lower = surface.to_lowercase();
        let gaz = if config.use_gazetteers {
            config.gazetteers.lookup(&lower)
        } else {
            &[]
        };
        TokenView {
            shape: word_shape(surface),
            is_digit: surface.chars().all(|c| c.is_numeric()),
            is_year: surface.len() == 4
                && surface.bytes().all(|b| b.is_ascii_digit())
                && (1500..=2100).contains(&surface.parse::<u32>().unwrap_or(0)),
            is_punct: surface.chars().all(|c| !c.is_alphanumeric()),
            is_cap: surface.chars().next().is_some_and(char::is_uppercase),
            lower,
            gaz,
        }
    }
}

/// Collapsed case/digit pattern: `Lemke` → `Xx`, `2015` → `d`, `McCallum` → `XxXx`.
pub fn word_shape(surface: &str) -> String {
    let mut shape = String::new();
    let mut last = None;
    for c in surface.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else if c.is_alphabetic() {
            'a'
        } else {
            c
        };
        if last != Some(s) {
            shape.push(s);
            last = Some(s);
        }
    }
    shape
}

fn offset_label(o: isize) -> String {
    if o > 0 {
        format!("+{o}")
    } else {
        o.to_string()
    }
}

fn position_bucket(position: usize, len: usize) -> &'static str {
    if position == 0 {
        "first"
    } else if position + 1 == len {
        "last"
    } else {
        match position * 3 / len {
            0 => "first-third",
            1 => "mid",
            _ => "last-third",
        }
    }
}

fn emit(views: &[TokenView<'_>], tokens: &[Token], position: usize, config: &FeatureConfig, out: &mut Vec<String>) {
    let len = tokens.len();
    let window = config.window as isize;
    out.push("bias".to_string());
    for o in -window..=window {
        let at = position as isize + o;
        let off = offset_label(o);
        if at < 0 {
            out.push(format!("w[{off}]=<BOS>"));
            continue;
        }
        if at as usize >= len {
            out.push(format!("w[{off}]=<EOS>"));
            continue;
        }
        let v = &views[at as usize];
        out.push(format!("w[{off}]={}", v.lower));
        if config.use_shape {
            out.push(format!("shape[{off}]={}", v.shape));
        }
        if v.is_digit {
            out.push(format!("isdigit[{off}]"));
        }
        if v.is_year {
            out.push(format!("isyear[{off}]"));
        }
        if v.is_punct {
            out.push(format!("ispunct[{off}]"));
        }
        if v.is_cap {
            out.push(format!("iscap[{off}]"));
        }
        for g in v.gaz {
            out.push(format!("gaz[{off}]={g}"));
        }
    }

    let center = &views[position];
    let chars: Vec<char> = center.lower.chars().collect();
    for &k in &config.affix_lengths {
        if k == 0 || k > chars.len() {
            continue;
        }
        out.push(format!("pre{k}={}", chars[..k].iter().collect::<String>()));
        out.push(format!("suf{k}={}", chars[chars.len() - k..].iter().collect::<String>()));
    }
    if center.is_digit {
        out.push(format!("ndigits={}", chars.len()));
    }
    out.push(format!("posbucket={}", position_bucket(position, len)));
}

/// Feature names for the token at `position`.
pub fn extract(tokens: &[Token], position: usize, config: &FeatureConfig) -> Result<Vec<String>> {
    if position >= tokens.len() {
        return Err(Error::Structural(format!(
            "feature position {position} out of range for {} tokens",
            tokens.len()
        )));
    }
    let views: Vec<TokenView<'_>> = tokens.iter().map(|t| TokenView::new(&t.surface, config)).collect();
    let mut out = Vec::new();
    emit(&views, tokens, position, config, &mut out);
    Ok(out)
}

/// Feature names for every position; equal to calling [`extract`] per position.
pub fn extract_sequence(tokens: &[Token], config: &FeatureConfig) -> Vec<Vec<String>> {
    let views: Vec<TokenView<'_>> = tokens.iter().map(|t| TokenView::new(&t.surface, config)).collect();
    (0..tokens.len())
        .map(|p| {
            let mut out = Vec::with_capacity(64);
            emit(&views, tokens, p, config, &mut out);
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::{tokenize, TokenizerConfig};

    fn toks(raw: &str) -> Vec<Token> {
        tokenize(raw, &TokenizerConfig::default())
    }

    #[test]
    fn digit_token_templates() {
        let f = extract(&toks("2015"), 0, &FeatureConfig::default()).unwrap();
        for expected in ["shape[0]=d", "isdigit[0]", "posbucket=first", "w[0]=2015", "ndigits=4", "bias"] {
            assert!(f.iter().any(|x| x == expected), "missing {expected} in {f:?}");
        }
    }

    #[test]
    fn boundary_offsets_emit_sentinels() {
        let f = extract(&toks("Lemke , C"), 0, &FeatureConfig::default()).unwrap();
        assert!(f.contains(&"w[-1]=<BOS>".to_string()));
        assert!(f.contains(&"w[-2]=<BOS>".to_string()));
        assert!(!f.iter().any(|x| x.starts_with("shape[-1]")));
        assert!(f.contains(&"w[+1]=,".to_string()));
        assert!(f.contains(&"w[+2]=c".to_string()));
        let last = extract(&toks("Lemke , C"), 2, &FeatureConfig::default()).unwrap();
        assert!(last.contains(&"w[+1]=<EOS>".to_string()));
        assert!(last.contains(&"posbucket=last".to_string()));
    }

    #[test]
    fn container_gazetteer_hit() {
        let f = extract(&toks("Proceedings"), 0, &FeatureConfig::default()).unwrap();
        assert!(f.contains(&"gaz[0]=container".to_string()), "{f:?}");
        assert!(f.contains(&"iscap[0]".to_string()));
        let off = FeatureConfig {
            use_gazetteers: false,
            ..FeatureConfig::default()
        };
        assert!(!extract(&toks("Proceedings"), 0, &off).unwrap().iter().any(|x| x.starts_with("gaz")));
    }

    #[test]
    fn out_of_range_position_is_error() {
        assert!(extract(&toks("a b"), 2, &FeatureConfig::default()).is_err());
        assert!(extract(&[], 0, &FeatureConfig::default()).is_err());
    }

    #[test]
    fn sequence_matches_single_position_extraction() {
        let t = toks("C. Lemke, M. Budka, \"Metalearning,\" Artif. Intell. Rev., vol. 44, 2015.");
        let cfg = FeatureConfig::default();
        let all = extract_sequence(&t, &cfg);
        for (p, feats) in all.iter().enumerate() {
            assert_eq!(feats, &extract(&t, p, &cfg).unwrap());
        }
    }

    #[test]
    fn shapes_and_buckets() {
        assert_eq!(word_shape("Lemke"), "Xx");
        assert_eq!(word_shape("McCallum"), "XxXx");
        assert_eq!(word_shape("IEEE"), "X");
        assert_eq!(word_shape("."), ".");
        assert_eq!(position_bucket(0, 1), "first");
        assert_eq!(position_bucket(1, 9), "first-third");
        assert_eq!(position_bucket(4, 9), "mid");
        assert_eq!(position_bucket(7, 9), "last-third");
    }
}
