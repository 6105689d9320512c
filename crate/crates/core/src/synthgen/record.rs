//! Structured bibliographic records, read and written as JSON lines.
//!
//! Keys: `authors` (list of `{given, family}`), `title`, `container`,
//! `container_kind` (`journal` or `proceedings`, default `journal`), `year`,
//! and the optional `volume`, `issue`, `pages` (`{first, last}`), `publisher`,
//! `editors`, `location`, `institution`, `note`, `url`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub given: String,
    pub family: String,
}

impl Person {
    pub fn new(given: impl Into<String>, family: impl Into<String>) -> Self {
        Person {
            given: given.into(),
            family: family.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainerKind {
    #[default]
    Journal,
    Proceedings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pages {
    pub first: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    pub authors: Vec<Person>,
    pub title: String,
    pub container: String,
    #[serde(default)]
    pub container_kind: ContainerKind,
    pub year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pages: Option<Pages>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publisher: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub editors: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub institution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

fn check_text(what: &str, s: &str) -> std::result::Result<(), String> {
    if s.trim().is_empty() {
        return Err(format!("{what} is empty"));
    }
    if s.trim() != s {
        return Err(format!("{what} has leading or trailing whitespace"));
    }
    if s.chars().any(|c| c.is_control()) {
        return Err(format!("{what} contains control characters"));
    }
    Ok(())
}

impl BibRecord {
    /// A journal article with only the required fields.
    pub fn article(authors: Vec<Person>, title: impl Into<String>, container: impl Into<String>, year: i32) -> Self {
        BibRecord {
            authors,
            title: title.into(),
            container: container.into(),
            container_kind: ContainerKind::Journal,
            year,
            volume: None,
            issue: None,
            pages: None,
            publisher: None,
            editors: None,
            location: None,
            institution: None,
            note: None,
            url: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(Error::Data)
    }

    fn check(&self) -> std::result::Result<(), String> {
        check_text("title", &self.title)?;
        check_text("container", &self.container)?;
        if !(1500..=2100).contains(&self.year) {
            return Err(format!("year {} outside 1500..=2100", self.year));
        }
        for (i, p) in self.authors.iter().enumerate() {
            check_text(&format!("author {i} family name"), &p.family)?;
            if !p.given.is_empty() {
                check_text(&format!("author {i} given name"), &p.given)?;
            }
        }
        let optional = [
            ("volume", &self.volume),
            ("issue", &self.issue),
            ("publisher", &self.publisher),
            ("editors", &self.editors),
            ("location", &self.location),
            ("institution", &self.institution),
            ("note", &self.note),
            ("url", &self.url),
        ];
        for (name, v) in optional {
            if let Some(v) = v {
                check_text(name, v)?;
            }
        }
        if let Some(p) = &self.pages {
            check_text("first page", &p.first)?;
            if let Some(last) = &p.last {
                check_text("last page", last)?;
                if let (Ok(a), Ok(b)) = (p.first.parse::<u64>(), last.parse::<u64>()) {
                    if a > b {
                        return Err(format!("first page {a} after last page {b}"));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn parse_records(text: &str) -> Result<Vec<BibRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: BibRecord = serde_json::from_str(line).map_err(|e| Error::Data(format!("line {}: {e}", i + 1)))?;
        r.check().map_err(|m| Error::Data(format!("line {}: {m}", i + 1)))?;
        out.push(r);
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<BibRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text)
}

pub fn records_to_string(records: &[BibRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_records(records: &[BibRecord], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_string(records)).map_err(|e| Error::io(path, e))
}

/// A three-author journal article with volume, issue and pages.
pub fn example_record() -> BibRecord {
    BibRecord {
        volume: Some("44".into()),
        issue: Some("1".into()),
        pages: Some(Pages {
            first: "117".into(),
            last: Some("130".into()),
        }),
        ..BibRecord::article(
            vec![Person::new("C", "Lemke"), Person::new("M", "Budka"), Person::new("B", "Gabrys")],
            "Metalearning: a survey of trends and technologies",
            "Artificial Intelligence Review",
            2015,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_lines_round_trip() {
        let r = example_record();
        let text = records_to_string(&[r.clone(), r.clone()]);
        assert_eq!(parse_records(&text).unwrap(), vec![r.clone(), r]);
    }

    #[test]
    fn validation() {
        let mut r = example_record();
        r.year = 1200;
        assert!(r.validate().is_err());
        let mut r = example_record();
        r.title = " ".into();
        assert!(r.validate().is_err());
        let mut r = example_record();
        r.pages = Some(Pages {
            first: "9".into(),
            last: Some("3".into()),
        });
        assert!(r.validate().is_err());
        assert!(matches!(parse_records("{}"), Err(Error::Data(m)) if m.starts_with("line 1")));
    }
}
