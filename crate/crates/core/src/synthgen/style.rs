//! Citation-style templates.
//!
//! A style file is a header of `key = value` lines followed by a line reading
//! `template:` and the template body. Values may be double-quoted to keep
//! surrounding spaces. Lines starting with `#` are comments.
//!
//! Template body grammar (whitespace outside quotes is ignored):
//!
//! ```text
//! body    := element*
//! element := "literal" | {slot} | {slot|directive|...} | [cond,...: body] | [body]
//! ```
//!
//! Slots: authors, title, container, year, volume, issue, pages, publisher,
//! editors, location, institution, note, url. Directives: upper, lower,
//! sentence. A group renders only if every condition holds; conditions are
//! slot names (the field is present) or `journal` / `proceedings` (container
//! kind). A group without conditions requires every slot it contains.
//! Groups nest at most two deep. Literals accept `\"` and `\\` escapes.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotField {
    Authors,
    Title,
    Container,
    Year,
    Volume,
    Issue,
    Pages,
    Publisher,
    Editors,
    Location,
    Institution,
    Note,
    Url,
}

impl SlotField {
    pub const ALL: [SlotField; 13] = [
        SlotField::Authors,
        SlotField::Title,
        SlotField::Container,
        SlotField::Year,
        SlotField::Volume,
        SlotField::Issue,
        SlotField::Pages,
        SlotField::Publisher,
        SlotField::Editors,
        SlotField::Location,
        SlotField::Institution,
        SlotField::Note,
        SlotField::Url,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SlotField::Authors => "authors",
            SlotField::Title => "title",
            SlotField::Container => "container",
            SlotField::Year => "year",
            SlotField::Volume => "volume",
            SlotField::Issue => "issue",
            SlotField::Pages => "pages",
            SlotField::Publisher => "publisher",
            SlotField::Editors => "editors",
            SlotField::Location => "location",
            SlotField::Institution => "institution",
            SlotField::Note => "note",
            SlotField::Url => "url",
        }
    }

    pub fn parse(s: &str) -> Option<SlotField> {
        SlotField::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for SlotField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    Upper,
    Lower,
    Sentence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Present(SlotField),
    Journal,
    Proceedings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Literal(String),
    Slot { field: SlotField, directives: Vec<Directive> },
    Group { conditions: Vec<Condition>, elements: Vec<Element> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameOrder {
    /// "C. Lemke"
    GivenFirst,
    /// "Lemke, C."
    FamilyFirst,
    /// First author family-first, the rest given-first.
    FirstFamily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorOptions {
    pub order: NameOrder,
    pub initials: bool,
    /// Appended to each initial ("." gives "J.").
    pub initial_punct: String,
    /// Between consecutive initials ("J. R." or "J.R.").
    pub initial_sep: String,
    /// Between family and given name in family-first order.
    pub sort_sep: String,
    pub delimiter: String,
    pub conjunction: String,
    /// With three or more names, keep the delimiter before the conjunction.
    pub oxford: bool,
    /// Lists longer than this are truncated; 0 disables truncation.
    pub et_al_threshold: usize,
    /// Names kept before the marker.
    pub et_al_first: usize,
    pub et_al_marker: String,
    pub et_al_delimiter: String,
}

impl Default for AuthorOptions {
    fn default() -> Self {
        AuthorOptions {
            order: NameOrder::GivenFirst,
            initials: true,
            initial_punct: ".".into(),
            initial_sep: " ".into(),
            sort_sep: ", ".into(),
            delimiter: ", ".into(),
            conjunction: " and ".into(),
            oxford: false,
            et_al_threshold: 0,
            et_al_first: 1,
            et_al_marker: "et al.".into(),
            et_al_delimiter: " ".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateFormat {
    Plain,
    Parenthesized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TitleCase {
    None,
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleTemplate {
    pub name: String,
    pub family: Option<String>,
    pub author: AuthorOptions,
    pub date: DateFormat,
    pub title_case: TitleCase,
    pub page_delimiter: String,
    pub elements: Vec<Element>,
}

impl StyleTemplate {
    pub fn new(name: impl Into<String>, elements: Vec<Element>) -> Self {
        StyleTemplate {
            name: name.into(),
            family: None,
            author: AuthorOptions::default(),
            date: DateFormat::Plain,
            title_case: TitleCase::None,
            page_delimiter: "-".into(),
            elements,
        }
    }

    pub fn parse(text: &str) -> Result<StyleTemplate> {
        parse_style(text)
    }

    pub fn from_file(path: &Path) -> Result<StyleTemplate> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_style(&text).map_err(|e| match e {
            Error::Template(m) => Error::Template(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn terr(line: usize, msg: impl fmt::Display) -> Error {
    Error::Template(format!("line {line}: {msg}"))
}

fn header_value(raw: &str) -> std::result::Result<String, String> {
    let v = raw.trim();
    if let Some(inner) = v.strip_prefix('"') {
        let inner = inner.strip_suffix('"').ok_or("unterminated quoted value")?;
        unescape(inner)
    } else {
        Ok(v.to_string())
    }
}

fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                other => return Err(format!("bad escape `\\{}`", other.map(String::from).unwrap_or_default())),
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

pub fn parse_style(text: &str) -> Result<StyleTemplate> {
    let mut style = StyleTemplate::new("", Vec::new());
    let mut body: Option<(usize, String)> = None;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some((_, b)) = body.as_mut() {
            b.push_str(line);
            b.push('\n');
            continue;
        }
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t == "template:" {
            body = Some((n + 1, String::new()));
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| terr(n, "expected `key = value`"))?;
        let value = header_value(value).map_err(|m| terr(n, m))?;
        let a = &mut style.author;
        let r: std::result::Result<(), String> = match key.trim() {
            "name" => {
                style.name = value;
                Ok(())
            }
            "family" => {
                style.family = Some(value);
                Ok(())
            }
            "author.order" => match value.as_str() {
                "given-first" => {
                    a.order = NameOrder::GivenFirst;
                    Ok(())
                }
                "family-first" => {
                    a.order = NameOrder::FamilyFirst;
                    Ok(())
                }
                "first-family" => {
                    a.order = NameOrder::FirstFamily;
                    Ok(())
                }
                v => Err(format!("unknown name order `{v}`")),
            },
            "author.initials" => parse_bool(&value).map(|b| a.initials = b),
            "author.initial-punct" => {
                a.initial_punct = value;
                Ok(())
            }
            "author.initial-sep" => {
                a.initial_sep = value;
                Ok(())
            }
            "author.sort-sep" => {
                a.sort_sep = value;
                Ok(())
            }
            "author.delimiter" => {
                a.delimiter = value;
                Ok(())
            }
            "author.conjunction" => {
                a.conjunction = value;
                Ok(())
            }
            "author.oxford" => parse_bool(&value).map(|b| a.oxford = b),
            "author.et-al-threshold" => parse_usize(&value).map(|v| a.et_al_threshold = v),
            "author.et-al-first" => parse_usize(&value).and_then(|v| {
                if v == 0 {
                    Err("et-al-first must be >= 1".into())
                } else {
                    a.et_al_first = v;
                    Ok(())
                }
            }),
            "author.et-al-marker" => {
                a.et_al_marker = value;
                Ok(())
            }
            "author.et-al-delimiter" => {
                a.et_al_delimiter = value;
                Ok(())
            }
            "date" => match value.as_str() {
                "plain" => {
                    style.date = DateFormat::Plain;
                    Ok(())
                }
                "parenthesized" => {
                    style.date = DateFormat::Parenthesized;
                    Ok(())
                }
                v => Err(format!("unknown date format `{v}`")),
            },
            "title.case" => match value.as_str() {
                "none" => {
                    style.title_case = TitleCase::None;
                    Ok(())
                }
                "sentence" => {
                    style.title_case = TitleCase::Sentence;
                    Ok(())
                }
                v => Err(format!("unknown title case `{v}`")),
            },
            "pages.delimiter" => {
                style.page_delimiter = value;
                Ok(())
            }
            k => Err(format!("unknown key `{k}`")),
        };
        r.map_err(|m| terr(n, m))?;
    }
    if style.name.is_empty() {
        return Err(Error::Template("style has no `name`".into()));
    }
    let (start, body) = body.ok_or_else(|| Error::Template(format!("style `{}` has no `template:` section", style.name)))?;
    style.elements = parse_template(&body, start)?;
    if style.elements.is_empty() {
        return Err(Error::Template(format!("style `{}` has an empty template", style.name)));
    }
    Ok(style)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    first_line: usize,
}

impl Parser<'_> {
    fn line(&self) -> usize {
        self.first_line + self.src[..self.pos].matches('\n').count()
    }

    fn err(&self, msg: impl fmt::Display) -> Error {
        terr(self.line(), msg)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_space(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while !matches!(self.bump(), Some('\n') | None) {}
                }
                _ => break,
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            self.bump();
        }
        self.src[start..self.pos].to_string()
    }

    fn elements(&mut self, depth: usize, closing: Option<char>) -> Result<Vec<Element>> {
        let mut out = Vec::new();
        loop {
            self.skip_space();
            match self.peek() {
                None => {
                    return match closing {
                        Some(c) => Err(self.err(format!("missing `{c}`"))),
                        None => Ok(out),
                    }
                }
                Some(c) if Some(c) == closing => {
                    self.bump();
                    return Ok(out);
                }
                Some('"') => {
                    self.bump();
                    let mut lit = String::new();
                    loop {
                        match self.bump() {
                            None => return Err(self.err("unterminated literal")),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some(e @ ('"' | '\\')) => lit.push(e),
                                _ => return Err(self.err("bad escape in literal")),
                            },
                            Some(c) => lit.push(c),
                        }
                    }
                    match out.last_mut() {
                        Some(Element::Literal(prev)) => prev.push_str(&lit),
                        _ => out.push(Element::Literal(lit)),
                    }
                }
                Some('{') => {
                    self.bump();
                    self.skip_space();
                    let name = self.ident();
                    let field = SlotField::parse(&name).ok_or_else(|| self.err(format!("unknown slot `{name}`")))?;
                    let mut directives = Vec::new();
                    loop {
                        self.skip_space();
                        match self.bump() {
                            Some('}') => break,
                            Some('|') => {
                                self.skip_space();
                                let d = self.ident();
                                directives.push(match d.as_str() {
                                    "upper" => Directive::Upper,
                                    "lower" => Directive::Lower,
                                    "sentence" => Directive::Sentence,
                                    _ => return Err(self.err(format!("unknown directive `{d}`"))),
                                });
                            }
                            _ => return Err(self.err(format!("malformed slot `{name}`"))),
                        }
                    }
                    out.push(Element::Slot { field, directives });
                }
                Some('[') => {
                    self.bump();
                    if depth >= 2 {
                        return Err(self.err("groups nest more than two deep"));
                    }
                    let conditions = self.conditions()?;
                    let elements = self.elements(depth + 1, Some(']'))?;
                    let conditions = match conditions {
                        Some(c) => c,
                        None => {
                            let mut c = Vec::new();
                            collect_slots(&elements, &mut c);
                            if c.is_empty() {
                                return Err(self.err("group without conditions contains no slot"));
                            }
                            c.into_iter().map(Condition::Present).collect()
                        }
                    };
                    out.push(Element::Group { conditions, elements });
                }
                Some(c) => return Err(self.err(format!("unexpected `{c}`"))),
            }
        }
    }

    /// Parses an optional `name, name:` prefix after `[`.
    fn conditions(&mut self) -> Result<Option<Vec<Condition>>> {
        let save = self.pos;
        let mut names = Vec::new();
        loop {
            self.skip_space();
            let name = self.ident();
            if name.is_empty() {
                self.pos = save;
                return Ok(None);
            }
            names.push(name);
            self.skip_space();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(':') => {
                    self.bump();
                    break;
                }
                _ => {
                    self.pos = save;
                    return Ok(None);
                }
            }
        }
        names
            .iter()
            .map(|n| match n.as_str() {
                "journal" => Ok(Condition::Journal),
                "proceedings" => Ok(Condition::Proceedings),
                s => SlotField::parse(s)
                    .map(Condition::Present)
                    .ok_or_else(|| self.err(format!("unknown group condition `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn collect_slots(elements: &[Element], out: &mut Vec<SlotField>) {
    for e in elements {
        match e {
            Element::Slot { field, .. } if !out.contains(field) => out.push(*field),
            Element::Group { elements, .. } => collect_slots(elements, out),
            _ => {}
        }
    }
}

pub fn parse_template(body: &str, first_line: usize) -> Result<Vec<Element>> {
    Parser {
        src: body,
        pos: 0,
        first_line,
    }
    .elements(0, None)
}
