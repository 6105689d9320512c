//! Field vocabulary and IOB2 token tags.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A bibliographic field type.
///
/// The declaration order is the canonical order; it fixes tag ids in trained
/// models and therefore the decoder's tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldLabel {
    Author,
    Title,
    Date,
    Journal,
    Booktitle,
    Pages,
    Volume,
    Issue,
    Publisher,
    Editor,
    /// Place of publication.
    Location,
    Institution,
    Note,
    Web,
    Tech,
}

impl FieldLabel {
    pub const ALL: [FieldLabel; 15] = [
        FieldLabel::Author,
        FieldLabel::Title,
        FieldLabel::Date,
        FieldLabel::Journal,
        FieldLabel::Booktitle,
        FieldLabel::Pages,
        FieldLabel::Volume,
        FieldLabel::Issue,
        FieldLabel::Publisher,
        FieldLabel::Editor,
        FieldLabel::Location,
        FieldLabel::Institution,
        FieldLabel::Note,
        FieldLabel::Web,
        FieldLabel::Tech,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldLabel::Author => "author",
            FieldLabel::Title => "title",
            FieldLabel::Date => "date",
            FieldLabel::Journal => "journal",
            FieldLabel::Booktitle => "booktitle",
            FieldLabel::Pages => "pages",
            FieldLabel::Volume => "volume",
            FieldLabel::Issue => "issue",
            FieldLabel::Publisher => "publisher",
            FieldLabel::Editor => "editor",
            FieldLabel::Location => "location",
            FieldLabel::Institution => "institution",
            FieldLabel::Note => "note",
            FieldLabel::Web => "web",
            FieldLabel::Tech => "tech",
        }
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FieldLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Data(format!("unknown field label `{s}`")))
    }
}

/// A subset of [`FieldLabel`], iterated in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelSet(u16);

impl LabelSet {
    pub const fn empty() -> Self {
        LabelSet(0)
    }

    pub const fn all() -> Self {
        LabelSet((1 << FieldLabel::ALL.len()) - 1)
    }

    pub fn contains(self, label: FieldLabel) -> bool {
        self.0 & (1 << label.index()) != 0
    }

    pub fn insert(&mut self, label: FieldLabel) {
        self.0 |= 1 << label.index();
    }

    pub fn remove(&mut self, label: FieldLabel) {
        self.0 &= !(1 << label.index());
    }

    pub fn with(mut self, label: FieldLabel) -> Self {
        self.insert(label);
        self
    }

    pub fn without(mut self, label: FieldLabel) -> Self {
        self.remove(label);
        self
    }

    pub fn intersection(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & other.0)
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn difference(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = FieldLabel> {
        FieldLabel::ALL.into_iter().filter(move |l| self.contains(*l))
    }

    /// Parses a comma-separated list such as `author,title,date`.
    pub fn parse_list(s: &str) -> Result<Self> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(FieldLabel::from_str)
            .collect()
    }
}

impl FromIterator<FieldLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = FieldLabel>>(iter: I) -> Self {
        let mut set = LabelSet::empty();
        for l in iter {
            set.insert(l);
        }
        set
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(l.as_str())?;
        }
        Ok(())
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let labels = Vec::<FieldLabel>::deserialize(deserializer)?;
        Ok(labels.into_iter().collect())
    }
}

/// One IOB2 tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenTag {
    O,
    B(FieldLabel),
    I(FieldLabel),
}

impl TokenTag {
    pub fn field(self) -> Option<FieldLabel> {
        match self {
            TokenTag::O => None,
            TokenTag::B(f) | TokenTag::I(f) => Some(f),
        }
    }

    pub fn is_begin(self) -> bool {
        matches!(self, TokenTag::B(_))
    }

    /// Whether `self` may directly follow `prev` (`None` = sequence start).
    pub fn may_follow(self, prev: Option<TokenTag>) -> bool {
        match self {
            TokenTag::I(f) => matches!(prev, Some(TokenTag::B(g) | TokenTag::I(g)) if g == f),
            _ => true,
        }
    }
}

impl fmt::Display for TokenTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenTag::O => f.write_str("O"),
            TokenTag::B(l) => write!(f, "B-{l}"),
            TokenTag::I(l) => write!(f, "I-{l}"),
        }
    }
}

impl FromStr for TokenTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(TokenTag::O);
        }
        match s.split_once('-') {
            Some(("B", f)) => Ok(TokenTag::B(f.parse()?)),
            Some(("I", f)) => Ok(TokenTag::I(f.parse()?)),
            _ => Err(Error::Data(format!("malformed tag `{s}`"))),
        }
    }
}

/// Checks IOB2 well-formedness; returns the index of the first offending `I`.
pub fn check_iob2(tags: &[TokenTag]) -> std::result::Result<(), usize> {
    let mut prev = None;
    for (i, &tag) in tags.iter().enumerate() {
        if !tag.may_follow(prev) {
            return Err(i);
        }
        prev = Some(tag);
    }
    Ok(())
}
